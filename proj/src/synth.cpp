#include "densepoly/synth.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <optional>

#include "densepoly/rng.hpp"

namespace densepoly::synth {

namespace {

constexpr int kCanvasMargin = 2;
constexpr int kMaxAttempts = 12;
constexpr int kMinSharedOverlap = 3;
constexpr int kMinStub = 4;  // shortest wall piece between a T-junction and a corner
constexpr std::uint64_t kNoiseStream = 0x6E6F697365ull;

struct Interval {
  int lo = 0;
  int hi = 0;
};

// A building in block-local integer coordinates.
struct LocalBuilding {
  std::vector<std::array<int, 2>> ring;
  int left = 0;
  int right = 0;
  Interval left_wall;
  Interval right_wall;
};

LocalBuilding make_building(Xoshiro256& rng, const SceneConfig& cfg, int x0, int y0, int w, int h,
                            bool left_shared, bool right_shared) {
  LocalBuilding b;
  b.left = x0;
  b.right = x0 + w;
  b.left_wall = {y0, y0 + h};
  b.right_wall = {y0, y0 + h};
  const int x1 = x0 + w, y1 = y0 + h;
  const bool can_l = w >= 12 && h >= 12 && !(left_shared && right_shared);
  if (can_l && rng.bernoulli(cfg.l_shape_prob)) {
    const int nw = rng.uniform_int(w / 3, w / 2);
    const int nh = rng.uniform_int(h / 3, h / 2);
    // The notch goes on a side without a shared wall.
    bool notch_right = right_shared ? false : (left_shared ? true : rng.bernoulli(0.5));
    const bool notch_top = rng.bernoulli(0.5);
    if (notch_right && notch_top) {
      b.ring = {{x0, y0}, {x1 - nw, y0}, {x1 - nw, y0 + nh}, {x1, y0 + nh}, {x1, y1}, {x0, y1}};
      b.right_wall = {y0 + nh, y1};
    } else if (notch_right) {
      b.ring = {{x0, y0}, {x1, y0}, {x1, y1 - nh}, {x1 - nw, y1 - nh}, {x1 - nw, y1}, {x0, y1}};
      b.right_wall = {y0, y1 - nh};
    } else if (notch_top) {
      b.ring = {{x0 + nw, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0 + nh}, {x0 + nw, y0 + nh}};
      b.left_wall = {y0 + nh, y1};
    } else {
      b.ring = {{x0, y0}, {x1, y0}, {x1, y1}, {x0 + nw, y1}, {x0 + nw, y1 - nh}, {x0, y1 - nh}};
      b.left_wall = {y0, y1 - nh};
    }
    return b;
  }
  b.ring = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
  return b;
}

// Inserts every vertex of `other` that lies strictly inside an edge of `ring`.
void insert_t_vertices(std::vector<std::array<int, 2>>& ring,
                       const std::vector<std::array<int, 2>>& other) {
  std::vector<std::array<int, 2>> out;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const auto a = ring[i];
    const auto b = ring[(i + 1) % ring.size()];
    out.push_back(a);
    std::vector<std::pair<long, std::array<int, 2>>> on_edge;
    for (const auto& p : other) {
      const long cr = static_cast<long>(b[0] - a[0]) * (p[1] - a[1]) -
                      static_cast<long>(b[1] - a[1]) * (p[0] - a[0]);
      if (cr != 0) continue;
      const long t = static_cast<long>(p[0] - a[0]) * (b[0] - a[0]) +
                     static_cast<long>(p[1] - a[1]) * (b[1] - a[1]);
      const long len2 = static_cast<long>(b[0] - a[0]) * (b[0] - a[0]) +
                        static_cast<long>(b[1] - a[1]) * (b[1] - a[1]);
      if (t > 0 && t < len2) on_edge.emplace_back(t, p);
    }
    std::sort(on_edge.begin(), on_edge.end());
    for (const auto& [t, p] : on_edge) {
      if (out.back() != p) out.push_back(p);
    }
  }
  ring = std::move(out);
}

struct Block {
  std::vector<LocalBuilding> buildings;
  std::vector<std::pair<std::size_t, std::size_t>> shared_pairs;
  int width = 0;
  int height = 0;
};

Block make_block(Xoshiro256& rng, const SceneConfig& cfg, int row_h, int max_width) {
  Block block;
  const int n = rng.uniform_int(1, 4);
  int cursor = 0;
  const int min_h = std::max(cfg.min_size, static_cast<int>(std::ceil(0.75 * row_h)));
  for (int k = 0; k < n; ++k) {
    bool share = k > 0 && rng.bernoulli(cfg.shared_wall_prob);
    const int gap = k == 0 ? 0 : (share ? 0 : cfg.min_gap + rng.uniform_int(0, 1));
    const int w = rng.uniform_int(cfg.min_size, cfg.max_size);
    if (cursor + gap + w > max_width) break;
    int h = rng.uniform_int(min_h, std::max(min_h, row_h));
    int y0 = rng.uniform_int(0, std::max(0, row_h - h));
    if (share) {
      // Snap near-aligned ends together so T-junctions sit at least kMinStub px from corners.
      const Interval prev = block.buildings.back().right_wall;
      if (std::abs(y0 - prev.lo) < kMinStub) y0 = prev.lo;
      if (std::abs(y0 + h - prev.hi) < kMinStub) h = prev.hi - y0;
      const int overlap = std::min(prev.hi, y0 + h) - std::max(prev.lo, y0);
      if (h < cfg.min_size || overlap < kMinSharedOverlap) {
        share = false;
        h = std::max(h, cfg.min_size);
        if (cursor + cfg.min_gap + w > max_width) break;
      }
    }
    const int x0 = cursor + (share || k == 0 ? 0 : std::max(gap, cfg.min_gap));
    LocalBuilding b = make_building(rng, cfg, x0, y0, w, h, share, false);
    if (share) {
      const std::size_t prev = block.buildings.size() - 1;
      const Interval pw = block.buildings[prev].right_wall;
      const int overlap = std::min(pw.hi, b.left_wall.hi) - std::max(pw.lo, b.left_wall.lo);
      if (overlap >= kMinSharedOverlap) {
        block.shared_pairs.emplace_back(prev, block.buildings.size());
      } else {
        // The previous building's notch shortened the wall; open a gap instead.
        const int shift = cfg.min_gap;
        if (x0 + shift + w > max_width) break;
        for (auto& v : b.ring) v[0] += shift;
        b.left += shift;
        b.right += shift;
      }
    }
    cursor = b.right;
    block.buildings.push_back(std::move(b));
  }
  for (const auto& [a, b] : block.shared_pairs) {
    const auto ring_a = block.buildings[a].ring;
    insert_t_vertices(block.buildings[a].ring, block.buildings[b].ring);
    insert_t_vertices(block.buildings[b].ring, ring_a);
  }
  block.width = cursor;
  block.height = row_h;
  return block;
}

std::optional<std::vector<Ring>> place_block(const Block& block, const SceneConfig& cfg, int origin_x,
                                             int origin_y, double angle,
                                             const std::vector<Ring>& placed) {
  const double pivot_x = std::round(origin_x + 0.5 * block.width);
  const double pivot_y = std::round(origin_y + 0.5 * block.height);
  const double c = std::cos(angle), s = std::sin(angle);
  std::vector<Ring> rings;
  for (const LocalBuilding& b : block.buildings) {
    Ring ring;
    for (const auto& v : b.ring) {
      const double lx = origin_x + v[0] - pivot_x;
      const double ly = origin_y + v[1] - pivot_y;
      // Vertices land on pixel centers so walls coincide with raster samples.
      const Point p{std::round(pivot_x + c * lx - s * ly) + 0.5,
                    std::round(pivot_y + s * lx + c * ly) + 0.5};
      if (p.x < kCanvasMargin || p.y < kCanvasMargin || p.x > cfg.width - kCanvasMargin ||
          p.y > cfg.height - kCanvasMargin) {
        return std::nullopt;
      }
      ring.push_back(p);
    }
    ring = remove_duplicate_vertices(std::move(ring));
    if (!is_valid_simple_ring(ring) || signed_area(ring) <= 0.0) return std::nullopt;
    rings.push_back(std::move(ring));
  }
  const double clearance = cfg.min_gap - 1.0;
  for (std::size_t i = 0; i < rings.size(); ++i) {
    for (std::size_t j = i + 1; j < rings.size(); ++j) {
      const bool shared = std::find(block.shared_pairs.begin(), block.shared_pairs.end(),
                                    std::make_pair(i, j)) != block.shared_pairs.end();
      if (!shared && ring_distance(rings[i], rings[j]) < clearance) return std::nullopt;
    }
    const BBox bi = bbox(rings[i]);
    for (const Ring& other : placed) {
      if (!bi.overlaps(bbox(other), clearance)) continue;
      if (ring_distance(rings[i], other) < clearance) return std::nullopt;
    }
  }
  return rings;
}

std::vector<Ring> pack_scene(Xoshiro256& rng, const SceneConfig& cfg) {
  std::vector<Ring> placed;
  int row_y = kCanvasMargin + rng.uniform_int(0, 2);
  while (row_y + cfg.min_size <= cfg.height - kCanvasMargin) {
    const int row_h = std::min(rng.uniform_int(cfg.min_size, cfg.max_size),
                               cfg.height - kCanvasMargin - row_y);
    int x = kCanvasMargin + rng.uniform_int(0, 3);
    while (x + cfg.min_size <= cfg.width - kCanvasMargin) {
      const Block block = make_block(rng, cfg, row_h, cfg.width - kCanvasMargin - x);
      const double angle = rng.uniform(-cfg.rotation, cfg.rotation);
      if (block.buildings.empty()) break;
      std::optional<std::vector<Ring>> rings;
      for (double factor : {1.0, 0.5, 0.0}) {
        rings = place_block(block, cfg, x, row_y, angle * factor, placed);
        if (rings) break;
      }
      if (!rings) {
        x += cfg.min_size;
        continue;
      }
      double right = x;
      for (const Ring& r : *rings) right = std::max(right, bbox(r).max_x);
      for (Ring& r : *rings) placed.push_back(std::move(r));
      x = static_cast<int>(right) + cfg.min_gap + rng.uniform_int(0, 2);
    }
    row_y += row_h + cfg.min_gap + rng.uniform_int(0, 1);
  }
  return placed;
}

double total_area(const std::vector<Ring>& rings) {
  double a = 0.0;
  for (const Ring& r : rings) a += area(r);
  return a;
}

}  // namespace

void SceneConfig::validate() const {
  if (width < 8 || height < 8) throw DomainError("scene: canvas must be at least 8x8");
  if (!(target_density > 0.0 && target_density < 1.0)) throw DomainError("scene: density must lie in (0, 1)");
  if (min_size < 3 || max_size < min_size) throw DomainError("scene: need 3 <= min_size <= max_size");
  if (!(rotation >= 0.0 && rotation <= kPi / 4.0)) throw DomainError("scene: rotation must lie in [0, pi/4]");
  if (!(shared_wall_prob >= 0.0 && shared_wall_prob <= 1.0)) throw DomainError("scene: shared_wall_prob must lie in [0, 1]");
  if (!(l_shape_prob >= 0.0 && l_shape_prob <= 1.0)) throw DomainError("scene: l_shape_prob must lie in [0, 1]");
  if (min_gap < 1) throw DomainError("scene: min_gap must be at least 1");
  if (!(edge_width >= 1.0)) throw DomainError("scene: edge_width must be at least 1");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw DomainError("scene: noise_sigma must be non-negative");
  if (!(blur_radius >= 0.0) || !std::isfinite(blur_radius)) throw DomainError("scene: blur_radius must be non-negative");
}

double coverage_fraction(const std::vector<Ring>& polygons, int height, int width) {
  Raster<std::uint8_t> hit(height, width, 0);
  for (const Ring& r : polygons) {
    const BBox b = bbox(r);
    const int x0 = std::max(0, static_cast<int>(std::floor(b.min_x)));
    const int x1 = std::min(width - 1, static_cast<int>(std::ceil(b.max_x)));
    const int y0 = std::max(0, static_cast<int>(std::floor(b.min_y)));
    const int y1 = std::min(height - 1, static_cast<int>(std::ceil(b.max_y)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        if (contains(r, {x + 0.5, y + 0.5})) hit(y, x) = 1;
      }
    }
  }
  const auto v = hit.values();
  return static_cast<double>(std::count(v.begin(), v.end(), 1)) / static_cast<double>(v.size());
}

std::vector<Ring> generate_scene(const SceneConfig& cfg) {
  cfg.validate();
  Xoshiro256 rng(cfg.seed);
  const double canvas = static_cast<double>(cfg.width) * cfg.height;
  double best_fill = 0.0;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::vector<Ring> rings = pack_scene(rng, cfg);
    best_fill = std::max(best_fill, total_area(rings) / canvas);
    if (rings.empty() || total_area(rings) < (cfg.target_density - 0.05) * canvas) continue;

    // Thin out random buildings until the covered area is at or below target.
    double covered = total_area(rings);
    while (rings.size() > 1 && covered > cfg.target_density * canvas) {
      const int victim = rng.uniform_int(0, static_cast<int>(rings.size()) - 1);
      covered -= area(rings[static_cast<std::size_t>(victim)]);
      rings.erase(rings.begin() + victim);
    }
    return rings;
  }
  throw DomainError("generate_scene: target density " + std::to_string(cfg.target_density) +
                    " unreachable with the given building sizes (best packing reached " +
                    std::to_string(best_fill) + ")");
}

GroundTruth rasterize(const std::vector<Ring>& polygons, const SceneConfig& cfg) {
  const int h = cfg.height, w = cfg.width;
  GroundTruth gt;
  gt.polygons = polygons;
  gt.y_int = ProbRaster(h, w, 0.0);
  gt.y_edge = ProbRaster(h, w, 0.0);
  gt.tang = Raster<double>(h, w, 0.0);
  gt.ff_gt = ff::FrameField(h, w);

  for (const Ring& r : polygons) {
    const BBox b = bbox(r);
    const int x0 = std::max(0, static_cast<int>(std::floor(b.min_x)));
    const int x1 = std::min(w - 1, static_cast<int>(std::ceil(b.max_x)));
    const int y0 = std::max(0, static_cast<int>(std::floor(b.min_y)));
    const int y1 = std::min(h - 1, static_cast<int>(std::ceil(b.max_y)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        if (contains(r, {x + 0.5, y + 0.5})) gt.y_int(y, x) = 1.0;
      }
    }
  }

  const double half = 0.5 * cfg.edge_width;
  Raster<double> best(h, w, std::numeric_limits<double>::infinity());
  for (const Ring& r : polygons) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      const Point a = r[i];
      const Point b = r[(i + 1) % r.size()];
      const double theta = ff::Direction::from_vector(b.x - a.x, b.y - a.y).angle();
      const int x0 = std::max(0, static_cast<int>(std::floor(std::min(a.x, b.x) - half - 1)));
      const int x1 = std::min(w - 1, static_cast<int>(std::ceil(std::max(a.x, b.x) + half)));
      const int y0 = std::max(0, static_cast<int>(std::floor(std::min(a.y, b.y) - half - 1)));
      const int y1 = std::min(h - 1, static_cast<int>(std::ceil(std::max(a.y, b.y) + half)));
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
          const double d = point_segment_distance({x + 0.5, y + 0.5}, a, b);
          if (d <= half && d < best(y, x)) {
            best(y, x) = d;
            gt.y_edge(y, x) = 1.0;
            gt.tang(y, x) = theta;
          }
        }
      }
    }
  }

  // Frame field: exact on edges, nearest-edge propagation elsewhere.
  Raster<std::uint8_t> done(h, w, 0);
  std::deque<std::pair<int, int>> queue;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (gt.y_edge(y, x) == 0.0) continue;
      gt.ff_gt.set(y, x, {-std::polar(1.0, 4.0 * gt.tang(y, x)), Complex(0.0, 0.0)});
      done(y, x) = 1;
      queue.emplace_back(y, x);
    }
  }
  if (queue.empty()) {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) gt.ff_gt.set(y, x, {Complex(-1.0, 0.0), Complex(0.0, 0.0)});
    return gt;
  }
  constexpr int kDy[8] = {-1, 0, 0, 1, -1, -1, 1, 1};
  constexpr int kDx[8] = {0, -1, 1, 0, -1, 1, -1, 1};
  while (!queue.empty()) {
    const auto [y, x] = queue.front();
    queue.pop_front();
    for (int k = 0; k < 8; ++k) {
      const int ny = y + kDy[k], nx = x + kDx[k];
      if (!done.in_bounds(ny, nx) || done(ny, nx)) continue;
      done(ny, nx) = 1;
      gt.ff_gt.set(ny, nx, gt.ff_gt.at(y, x));
      queue.emplace_back(ny, nx);
    }
  }
  return gt;
}

ProbRaster gaussian_blur(const ProbRaster& r, double sigma) {
  if (!(sigma > 0.0)) return r;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-(i * i) / (2.0 * sigma * sigma));
    kernel[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (double& v : kernel) v /= sum;

  const int h = r.height(), w = r.width();
  ProbRaster tmp(h, w), out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        acc += kernel[static_cast<std::size_t>(i + radius)] * r(y, std::clamp(x + i, 0, w - 1));
      }
      tmp(y, x) = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        acc += kernel[static_cast<std::size_t>(i + radius)] * tmp(std::clamp(y + i, 0, h - 1), x);
      }
      out(y, x) = acc;
    }
  }
  return out;
}

Degraded corrupt(const GroundTruth& gt, const SceneConfig& cfg) {
  if (!(cfg.noise_sigma >= 0.0)) throw DomainError("corrupt: noise_sigma must be non-negative");
  if (!(cfg.blur_radius >= 0.0)) throw DomainError("corrupt: blur_radius must be non-negative");
  Degraded out{gaussian_blur(gt.y_int, cfg.blur_radius), gaussian_blur(gt.y_edge, cfg.blur_radius),
               gt.ff_gt};
  if (cfg.noise_sigma == 0.0) return out;

  Xoshiro256 rng(cfg.seed ^ kNoiseStream);
  const double s = cfg.noise_sigma;
  for (ProbRaster* map : {&out.f_int, &out.f_edge}) {
    for (double& v : map->values()) v = std::clamp(v + s * rng.normal(), 0.0, 1.0);
  }
  for (Raster<Complex>* plane : {&out.ff.k0, &out.ff.k1}) {
    for (Complex& v : plane->values()) {
      const double re = rng.normal();
      const double im = rng.normal();
      v += Complex(s * re, s * im);
    }
  }
  return out;
}

}  // namespace densepoly::synth
