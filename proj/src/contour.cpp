#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <unordered_map>

#include "densepoly/polygonize.hpp"

namespace densepoly::poly {

namespace {

constexpr double kCoincident = 1e-12;

// Nearest frame direction; ties go to the first.
int snap(ff::Direction t, const ff::DirectionPair& pair) {
  return ff::angular_distance(t, pair.dirs[1]) < ff::angular_distance(t, pair.dirs[0]) ? 1 : 0;
}

}  // namespace

std::set<std::size_t> detect_corners(const std::vector<Point>& path, const ff::FrameField& field,
                                     double angle_thresh, bool closed, double eps_degenerate) {
  std::set<std::size_t> corners;
  const std::size_t n = path.size();
  if (n < 3) return corners;
  const std::size_t first = closed ? 0 : 1;
  const std::size_t last = closed ? n : n - 1;
  for (std::size_t i = first; i < last; ++i) {
    const Point p = path[i];
    // Walk outwards past coincident nodes.
    std::optional<Point> prev, next;
    for (std::size_t step = 1; step < n; ++step) {
      if (!closed && step > i) break;
      const Point q = path[(i + n - step) % n];
      if (distance(p, q) > kCoincident) {
        prev = q;
        break;
      }
    }
    for (std::size_t step = 1; step < n; ++step) {
      if (!closed && i + step >= n) break;
      const Point q = path[(i + step) % n];
      if (distance(p, q) > kCoincident) {
        next = q;
        break;
      }
    }
    if (!prev || !next) continue;
    const ff::Direction t_in = ff::Direction::from_vector(p.x - prev->x, p.y - prev->y);
    const ff::Direction t_out = ff::Direction::from_vector(next->x - p.x, next->y - p.y);
    const ff::DirectionPair pair = ff::directions_from_coeffs(field.sample(p), eps_degenerate);
    const bool corner = pair.degenerate ? ff::angular_distance(t_in, t_out) > angle_thresh
                                        : snap(t_in, pair) != snap(t_out, pair);
    if (corner) corners.insert(i);
  }
  return corners;
}

std::vector<Point> rdp(const std::vector<Point>& line, double tol) {
  if (!(tol > 0.0) || line.size() < 3) return line;
  std::vector<bool> keep(line.size(), false);
  keep.front() = keep.back() = true;
  std::vector<std::pair<std::size_t, std::size_t>> stack = {{0, line.size() - 1}};
  while (!stack.empty()) {
    const auto [lo, hi] = stack.back();
    stack.pop_back();
    double worst = -1.0;
    std::size_t idx = lo;
    for (std::size_t i = lo + 1; i < hi; ++i) {
      const double d = point_segment_distance(line[i], line[lo], line[hi]);
      if (d > worst) {
        worst = d;
        idx = i;
      }
    }
    if (worst > tol) {
      keep[idx] = true;
      stack.emplace_back(lo, idx);
      stack.emplace_back(idx, hi);
    }
  }
  std::vector<Point> out;
  for (std::size_t i = 0; i < line.size(); ++i)
    if (keep[i]) out.push_back(line[i]);
  return out;
}

std::vector<std::vector<Point>> split_and_simplify(const std::vector<Point>& path,
                                                   const std::set<std::size_t>& corners,
                                                   double tol) {
  std::vector<std::vector<Point>> pieces;
  if (path.empty()) return pieces;
  std::vector<std::size_t> cuts = {0};
  for (std::size_t c : corners) {
    if (c >= path.size()) throw DomainError("split_and_simplify: corner index out of range");
    if (c != 0 && c != path.size() - 1) cuts.push_back(c);
  }
  cuts.push_back(path.size() - 1);
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const std::vector<Point> piece(path.begin() + static_cast<std::ptrdiff_t>(cuts[k]),
                                   path.begin() + static_cast<std::ptrdiff_t>(cuts[k + 1]) + 1);
    pieces.push_back(rdp(piece, tol));
  }
  if (path.size() == 1) pieces.push_back(path);
  return pieces;
}

double interior_score(const Ring& ring, const ProbRaster& f_int) {
  const BBox b = bbox(ring);
  const int x0 = std::max(0, static_cast<int>(std::floor(b.min_x - 0.5)));
  const int x1 = std::min(f_int.width() - 1, static_cast<int>(std::ceil(b.max_x - 0.5)));
  const int y0 = std::max(0, static_cast<int>(std::floor(b.min_y - 0.5)));
  const int y1 = std::min(f_int.height() - 1, static_cast<int>(std::ceil(b.max_y - 0.5)));
  double sum = 0.0;
  std::size_t count = 0;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      if (contains(ring, {x + 0.5, y + 0.5})) {
        sum += f_int(y, x);
        ++count;
      }
    }
  }
  if (count > 0) return std::clamp(sum / static_cast<double>(count), 0.0, 1.0);
  Point c{0.0, 0.0};
  for (const Point& p : ring) c = c + p;
  c = c * (1.0 / static_cast<double>(ring.size()));
  return std::clamp(sample_bilinear(f_int, c.x, c.y), 0.0, 1.0);
}

namespace {

// Spatial hash over segment bounding boxes.
std::optional<std::pair<std::size_t, std::size_t>> first_crossing(const SkeletonGraph& g) {
  constexpr double kCell = 8.0;
  std::unordered_map<long long, std::vector<std::size_t>> buckets;
  auto key = [](long long cx, long long cy) { return (cx << 32) ^ (cy & 0xffffffffLL); };
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const Point a = g.nodes[static_cast<std::size_t>(g.edges[e].first)];
    const Point b = g.nodes[static_cast<std::size_t>(g.edges[e].second)];
    const auto cx0 = static_cast<long long>(std::floor(std::min(a.x, b.x) / kCell));
    const auto cx1 = static_cast<long long>(std::floor(std::max(a.x, b.x) / kCell));
    const auto cy0 = static_cast<long long>(std::floor(std::min(a.y, b.y) / kCell));
    const auto cy1 = static_cast<long long>(std::floor(std::max(a.y, b.y) / kCell));
    for (long long cy = cy0; cy <= cy1; ++cy)
      for (long long cx = cx0; cx <= cx1; ++cx) buckets[key(cx, cy)].push_back(e);
  }
  std::optional<std::pair<std::size_t, std::size_t>> found;
  for (const auto& [k, list] : buckets) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      for (std::size_t j = i + 1; j < list.size(); ++j) {
        std::size_t e = list[i], f = list[j];
        if (e > f) std::swap(e, f);
        if (found && std::make_pair(e, f) >= *found) continue;
        const auto [a0, a1] = g.edges[e];
        const auto [b0, b1] = g.edges[f];
        const bool share = a0 == b0 || a0 == b1 || a1 == b0 || a1 == b1;
        const SegmentRelation rel = classify_segments(
            g.nodes[static_cast<std::size_t>(a0)], g.nodes[static_cast<std::size_t>(a1)],
            g.nodes[static_cast<std::size_t>(b0)], g.nodes[static_cast<std::size_t>(b1)]);
        const bool bad = share ? rel == SegmentRelation::kOverlapping || rel == SegmentRelation::kCrossing
                               : rel != SegmentRelation::kDisjoint;
        if (bad) found = std::make_pair(e, f);
      }
    }
  }
  return found;
}

}  // namespace

std::optional<std::pair<std::size_t, std::size_t>> find_crossing(const SkeletonGraph& g) {
  return first_crossing(g);
}

std::vector<ScoredPolygon> extract_polygons(const SkeletonGraph& graph, const ProbRaster& f_int) {
  if (const auto bad = first_crossing(graph)) {
    const SkeletonGraph& g = graph;
    const auto seg = [&](std::size_t e) {
      const Point a = g.nodes[static_cast<std::size_t>(g.edges[e].first)];
      const Point b = g.nodes[static_cast<std::size_t>(g.edges[e].second)];
      return "(" + std::to_string(a.x) + ", " + std::to_string(a.y) + ")-(" + std::to_string(b.x) +
             ", " + std::to_string(b.y) + ")";
    };
    throw DomainError("extract_polygons: graph is not planar; segment " + seg(bad->first) +
                      " crosses segment " + seg(bad->second));
  }
  const SkeletonGraph g = prune_to_cycles(graph);
  if (g.edges.empty()) return {};

  // Half-edge h = 2e goes first->second, 2e+1 goes second->first.
  const std::size_t n_half = 2 * g.edges.size();
  auto origin = [&](std::size_t h) {
    const auto& e = g.edges[h / 2];
    return static_cast<std::size_t>(h % 2 == 0 ? e.first : e.second);
  };
  auto target = [&](std::size_t h) {
    const auto& e = g.edges[h / 2];
    return static_cast<std::size_t>(h % 2 == 0 ? e.second : e.first);
  };
  std::vector<std::vector<std::size_t>> out_edges(g.nodes.size());
  for (std::size_t h = 0; h < n_half; ++h) out_edges[origin(h)].push_back(h);
  std::vector<std::size_t> pos_in_node(n_half, 0);
  for (std::size_t v = 0; v < g.nodes.size(); ++v) {
    auto& list = out_edges[v];
    const Point o = g.nodes[v];
    std::sort(list.begin(), list.end(), [&](std::size_t a, std::size_t b) {
      const Point pa = g.nodes[target(a)] - o, pb = g.nodes[target(b)] - o;
      const double aa = std::atan2(pa.y, pa.x), ab = std::atan2(pb.y, pb.x);
      return aa != ab ? aa < ab : a < b;
    });
    for (std::size_t i = 0; i < list.size(); ++i) pos_in_node[list[i]] = i;
  }
  auto next_half = [&](std::size_t h) {
    const std::size_t twin = h ^ 1U;
    const auto& list = out_edges[target(h)];
    const std::size_t i = pos_in_node[twin];
    return list[(i + list.size() - 1) % list.size()];
  };

  std::vector<bool> used(n_half, false);
  std::vector<ScoredPolygon> faces;
  for (std::size_t start = 0; start < n_half; ++start) {
    if (used[start]) continue;
    Ring ring;
    std::size_t h = start;
    while (!used[h]) {
      used[h] = true;
      ring.push_back(g.nodes[origin(h)]);
      h = next_half(h);
    }
    if (ring.size() < 3 || signed_area(ring) <= 0.0) continue;
    const double score = interior_score(ring, f_int);
    if (score > 0.0) faces.push_back({std::move(ring), score});
  }
  return faces;
}

std::vector<ScoredPolygon> filter_polygons(const std::vector<ScoredPolygon>& polys, double min_prob,
                                           double min_area) {
  if (!(min_prob >= 0.0 && min_prob <= 1.0)) throw DomainError("filter_polygons: min_prob must lie in [0, 1]");
  if (!(min_area >= 0.0)) throw DomainError("filter_polygons: min_area must be non-negative");
  std::vector<ScoredPolygon> out;
  for (const ScoredPolygon& p : polys) {
    if (p.score >= min_prob && area(p.ring) >= min_area) out.push_back(p);
  }
  return out;
}

}  // namespace densepoly::poly
