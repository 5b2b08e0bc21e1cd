#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>

#include "densepoly/metrics.hpp"
#include "densepoly/parallel.hpp"
#include "densepoly/polygonize.hpp"
#include "densepoly/rng.hpp"
#include "densepoly/synth.hpp"

using namespace densepoly;
using namespace densepoly::poly;

namespace {

const ff::FrameField& axis_field(int h, int w) {
  static std::map<std::pair<int, int>, ff::FrameField> cache;
  auto [it, fresh] = cache.try_emplace({h, w}, h, w);
  if (fresh) {
    for (Complex& c : it->second.k0.values()) c = Complex(-1.0, 0.0);
  }
  return it->second;
}

BinaryRaster mask_from(const std::vector<std::string>& rows) {
  BinaryRaster m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()), 0);
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) m(y, x) = rows[y][x] == '#' ? 1 : 0;
  return m;
}

std::set<std::pair<int, int>> set_pixels(const BinaryRaster& m) {
  std::set<std::pair<int, int>> out;
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      if (m(y, x)) out.insert({y, x});
  return out;
}

// Two unit squares side by side: nodes on a 3x2 lattice with the middle wall.
SkeletonGraph shared_wall_graph() {
  SkeletonGraph g;
  g.nodes = {{2, 2}, {4, 2}, {6, 2}, {2, 4}, {4, 4}, {6, 4}};
  g.edges = {{0, 1}, {1, 2}, {3, 4}, {4, 5}, {0, 3}, {1, 4}, {2, 5}};
  return g;
}

// All simple cycles of a small graph as sorted node sets, by exhaustive DFS.
std::set<std::vector<int>> all_simple_cycles(const SkeletonGraph& g) {
  const auto adj = g.adjacency();
  std::set<std::vector<int>> cycles;
  std::vector<int> stack;
  std::vector<bool> on(g.nodes.size(), false);
  std::function<void(int, int)> dfs = [&](int start, int v) {
    for (int u : adj[v]) {
      if (u == start && stack.size() >= 3) {
        std::vector<int> c = stack;
        std::sort(c.begin(), c.end());
        cycles.insert(c);
      } else if (!on[u] && u > start) {
        on[u] = true;
        stack.push_back(u);
        dfs(start, u);
        stack.pop_back();
        on[u] = false;
      }
    }
  };
  for (int s = 0; s < static_cast<int>(g.nodes.size()); ++s) {
    on.assign(g.nodes.size(), false);
    on[s] = true;
    stack = {s};
    dfs(s, s);
  }
  return cycles;
}

double best_iou(const std::vector<ScoredPolygon>& preds, const Ring& gt) {
  double best = 0.0;
  for (const auto& p : preds) {
    const BBox a = bbox(p.ring), b = bbox(gt);
    if (!a.overlaps(b, 0.0)) continue;
    best = std::max(best, metrics::polygon_iou(p.ring, gt));
  }
  return best;
}

}  // namespace

TEST(Skeletonize, ThreePixelBarGivesCenterlinePath) {
  BinaryRaster m(11, 20, 0);
  for (int y = 4; y <= 6; ++y)
    for (int x = 2; x <= 17; ++x) m(y, x) = 1;
  const SkeletonGraph g = skeletonize(m);
  ASSERT_GE(g.nodes.size(), 5u);
  for (const Point& p : g.nodes) EXPECT_DOUBLE_EQ(p.y, 5.5);
  const auto deg = g.degrees();
  EXPECT_EQ(std::count(deg.begin(), deg.end(), 1), 2);
  EXPECT_EQ(std::count(deg.begin(), deg.end(), 2), static_cast<long>(g.nodes.size()) - 2);
  EXPECT_EQ(g.edges.size(), g.nodes.size() - 1);
}

TEST(Skeletonize, OnePixelRingIsASingleCycle) {
  const BinaryRaster m = mask_from({
      "..........",
      ".#######..",
      ".#.....#..",
      ".#.....#..",
      ".#.....#..",
      ".#######..",
      "..........",
  });
  EXPECT_EQ(thin(m), m);
  const SkeletonGraph g = skeletonize(m);
  EXPECT_EQ(g.nodes.size(), 20u);
  EXPECT_EQ(g.edges.size(), 20u);
  for (int d : g.degrees()) EXPECT_EQ(d, 2);
}

// Reference pixels come from an independent Zhang-Suen implementation run on
// the same 15x15 bitmap (two 3-px arms crossing at the center).
TEST(Skeletonize, PlusShapeMatchesReferenceThinning) {
  BinaryRaster m(15, 15, 0);
  for (int y = 6; y <= 8; ++y)
    for (int x = 2; x <= 12; ++x) m(y, x) = 1;
  for (int y = 2; y <= 12; ++y)
    for (int x = 6; x <= 8; ++x) m(y, x) = 1;
  const std::set<std::pair<int, int>> reference = {
      {3, 7}, {4, 7}, {5, 7}, {6, 7}, {7, 3}, {7, 4}, {7, 5}, {7, 6},
      {7, 7}, {7, 8}, {7, 9}, {7, 10}, {8, 7}, {9, 7}, {10, 7}};
  EXPECT_EQ(set_pixels(thin(m)), reference);

  const SkeletonGraph g = skeletonize(m);
  const auto deg = g.degrees();
  EXPECT_EQ(std::count(deg.begin(), deg.end(), 4), 1);
  EXPECT_EQ(std::count_if(deg.begin(), deg.end(), [](int d) { return d >= 3; }), 1);
  EXPECT_EQ(std::count(deg.begin(), deg.end(), 1), 4);
  const auto hub = std::find(deg.begin(), deg.end(), 4) - deg.begin();
  EXPECT_EQ(g.nodes[hub], Point(7.5, 7.5));
}

TEST(Skeletonize, EmptyMaskGivesEmptyGraph) {
  const SkeletonGraph g = skeletonize(BinaryRaster(8, 8, 0));
  EXPECT_TRUE(g.nodes.empty());
  EXPECT_TRUE(g.edges.empty());
}

TEST(SkeletonGraph, ValidateCatchesBrokenGraphs) {
  SkeletonGraph g = shared_wall_graph();
  EXPECT_NO_THROW(g.validate(10, 10));
  g.edges.push_back({2, 2});
  EXPECT_THROW(g.validate(10, 10), DomainError);
  g = shared_wall_graph();
  g.edges.push_back({1, 0});
  EXPECT_THROW(g.validate(10, 10), DomainError);
  g = shared_wall_graph();
  g.nodes.push_back({4.0 + 1e-8, 4.0});
  EXPECT_THROW(g.validate(10, 10), DomainError);
  g = shared_wall_graph();
  EXPECT_THROW(g.validate(3, 10), DomainError);
}

TEST(PruneToCycles, DropsTailsAndBridges) {
  SkeletonGraph g = shared_wall_graph();
  g.nodes.push_back({8, 4});
  g.nodes.push_back({9, 5});
  g.edges.push_back({5, 6});
  g.edges.push_back({6, 7});
  const SkeletonGraph p = prune_to_cycles(g);
  EXPECT_EQ(p.nodes.size(), 6u);
  EXPECT_EQ(p.edges.size(), 7u);

  SkeletonGraph path;
  path.nodes = {{1, 1}, {2, 1}, {3, 1}};
  path.edges = {{0, 1}, {1, 2}};
  EXPECT_TRUE(prune_to_cycles(path).nodes.empty());
}

// ---------------------------------------------------------------------------

TEST(AcmRefine, ZeroIterationsIsIdentity) {
  synth::SceneConfig c;
  c.seed = 2;
  const auto gt = synth::rasterize(synth::generate_scene(c), c);
  BinaryRaster m(c.height, c.width, 0);
  for (std::size_t i = 0; i < m.size(); ++i) m.values()[i] = gt.y_edge.values()[i] >= 0.5;
  const SkeletonGraph g = skeletonize(m);
  AcmParams p;
  p.max_iters = 0;
  const SkeletonGraph r = acm_refine(g, gt.y_int, gt.y_edge, gt.ff_gt, p);
  EXPECT_EQ(r.nodes, g.nodes);
  EXPECT_EQ(r.edges, g.edges);
}

TEST(AcmRefine, GroundTruthInputsMoveLessThanHalfPixel) {
  // Graph nodes sit on the true walls: every ring densified at unit spacing.
  synth::SceneConfig c;
  c.seed = 3;
  c.shared_wall_prob = 0.0;
  const auto polys = synth::generate_scene(c);
  const auto gt = synth::rasterize(polys, c);
  SkeletonGraph g;
  for (const Ring& r : polys) {
    const int first = static_cast<int>(g.nodes.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
      const Point a = r[i], b = r[(i + 1) % r.size()];
      const int steps = std::max(1, static_cast<int>(std::round(distance(a, b))));
      for (int k = 0; k < steps; ++k) {
        const double s = static_cast<double>(k) / steps;
        g.nodes.push_back({a.x + s * (b.x - a.x), a.y + s * (b.y - a.y)});
      }
    }
    const int last = static_cast<int>(g.nodes.size()) - 1;
    for (int k = first; k < last; ++k) g.edges.push_back({k, k + 1});
    g.edges.push_back({last, first});
  }
  ASSERT_NO_THROW(g.validate(c.height, c.width));
  AcmTrace trace;
  const SkeletonGraph r = acm_refine(g, gt.y_int, gt.y_edge, gt.ff_gt, {}, &trace);
  ASSERT_EQ(r.nodes.size(), g.nodes.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) worst = std::max(worst, distance(r.nodes[i], g.nodes[i]));
  EXPECT_LT(worst, 0.5);
  for (const auto& energies : trace.energies)
    for (std::size_t k = 1; k < energies.size(); ++k) EXPECT_LE(energies[k], energies[k - 1]);
}

// Oracle: along the cross-section the data term is the piecewise-linear
// interpolant of 1 - profile between pixel centers, so its minimum sits at
// the center of the brightest column.
TEST(AcmRefine, ConvergesOntoStraightRidge) {
  const int h = 20, w = 30;
  ProbRaster f_edge(h, w, 0.0);
  double best_x = 0.0, best_v = -1.0;
  for (int x = 0; x < w; ++x) {
    const double v = std::exp(-std::pow(x + 0.5 - 10.5, 2) / 8.0);
    if (v > best_v) {
      best_v = v;
      best_x = x + 0.5;
    }
    for (int y = 0; y < h; ++y) f_edge(y, x) = v;
  }
  SkeletonGraph g;
  for (int k = 0; k < 10; ++k) g.nodes.push_back({best_x + 2.0, 5.5 + k});
  for (int k = 0; k + 1 < 10; ++k) g.edges.push_back({k, k + 1});
  AcmParams p;
  p.lambda_ff = 0.0;
  p.lambda_internal = 0.0;
  const SkeletonGraph r = acm_refine(g, ProbRaster(h, w, 1.0), f_edge, ff::FrameField(h, w), p);
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    EXPECT_NEAR(r.nodes[i].x, best_x, p.tol) << i;
    EXPECT_DOUBLE_EQ(r.nodes[i].y, g.nodes[i].y) << i;
  }
}

TEST(AcmRefine, NanEnergyNamesTheNode) {
  ProbRaster f_edge(10, 10, 0.5);
  f_edge(4, 4) = std::nan("");
  SkeletonGraph g;
  g.nodes = {{4.5, 4.5}, {6.5, 4.5}};
  g.edges = {{0, 1}};
  try {
    acm_refine(g, ProbRaster(10, 10, 1.0), f_edge, axis_field(10, 10), {});
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("node"), std::string::npos) << e.what();
  }
}

TEST(AcmGradient, MatchesFiniteDifferences) {
  synth::SceneConfig c;
  c.seed = 4;
  c.noise_sigma = 0.05;
  const auto gt = synth::rasterize(synth::generate_scene(c), c);
  const auto d = synth::corrupt(gt, c);
  SkeletonGraph g;
  g.nodes = {{40.3, 40.7}, {44.1, 41.2}, {45.6, 45.9}, {41.2, 44.4}};
  g.edges = {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
  const AcmParams p;
  const auto grad = acm_gradient(g, d.f_edge, d.ff, p);
  const double h = 1e-6;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    for (int axis = 0; axis < 2; ++axis) {
      SkeletonGraph plus = g, minus = g;
      (axis == 0 ? plus.nodes[i].x : plus.nodes[i].y) += h;
      (axis == 0 ? minus.nodes[i].x : minus.nodes[i].y) -= h;
      const double fd = (acm_energy(plus, d.f_edge, d.ff, p) - acm_energy(minus, d.f_edge, d.ff, p)) / (2 * h);
      EXPECT_NEAR(axis == 0 ? grad[i].x : grad[i].y, fd, 1e-5) << i << "," << axis;
    }
  }
}

// ---------------------------------------------------------------------------

TEST(DetectCorners, AxisSquareHasFourCorners) {
  std::vector<Point> path;
  for (int k = 0; k < 10; ++k) path.push_back({5.0 + k, 5.0});
  for (int k = 0; k < 10; ++k) path.push_back({15.0, 5.0 + k});
  for (int k = 0; k < 10; ++k) path.push_back({15.0 - k, 15.0});
  for (int k = 0; k < 10; ++k) path.push_back({5.0, 15.0 - k});
  const auto corners = detect_corners(path, axis_field(20, 20), kDefaultCornerAngle, true);
  EXPECT_EQ(corners, (std::set<std::size_t>{0, 10, 20, 30}));
}

TEST(DetectCorners, StraightPathHasNone) {
  std::vector<Point> path;
  for (int k = 0; k < 15; ++k) path.push_back({2.0 + k, 4.0 + 0.02 * k});
  EXPECT_TRUE(detect_corners(path, axis_field(20, 20)).empty());
}

TEST(DetectCorners, LShapeFromSynthFieldHasSixCorners) {
  // A rotated L, rasterized by the synthetic generator for its field.
  const double t = 0.3;
  const Point o{30.5, 12.5};
  const Point u{std::cos(t), std::sin(t)}, v{-std::sin(t), std::cos(t)};
  auto at = [&](double a, double b) { return Point{o.x + a * u.x + b * v.x, o.y + a * u.y + b * v.y}; };
  const Ring l = {at(0, 0), at(24, 0), at(24, 10), at(10, 10), at(10, 26), at(0, 26)};
  ASSERT_GT(signed_area(l), 0.0);
  synth::SceneConfig c;
  c.width = c.height = 64;
  const auto gt = synth::rasterize({l}, c);

  std::vector<Point> path;
  std::set<std::size_t> expected;
  for (std::size_t i = 0; i < l.size(); ++i) {
    const Point a = l[i], b = l[(i + 1) % l.size()];
    const int steps = static_cast<int>(std::round(distance(a, b)));
    expected.insert(path.size());
    for (int k = 0; k < steps; ++k) {
      const double s = static_cast<double>(k) / steps;
      path.push_back({a.x + s * (b.x - a.x), a.y + s * (b.y - a.y)});
    }
  }
  const auto corners = detect_corners(path, gt.ff_gt, kDefaultCornerAngle, true);
  EXPECT_EQ(corners.size(), 6u);
  EXPECT_EQ(corners, expected);
}

// ---------------------------------------------------------------------------

TEST(Rdp, StraightSegmentCollapsesToEnds) {
  std::vector<Point> line;
  for (int k = 0; k < 100; ++k) line.push_back({0.5 * k, 2.0 + 0.25 * k});
  const auto out = rdp(line, 0.1);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out.front(), line.front());
  EXPECT_EQ(out.back(), line.back());
}

TEST(Rdp, ZeroToleranceKeepsEveryVertex) {
  Xoshiro256 rng(12);
  std::vector<Point> line;
  for (int k = 0; k < 50; ++k) line.push_back({static_cast<double>(k), rng.uniform(-0.3, 0.3)});
  EXPECT_EQ(rdp(line, 0.0), line);
  EXPECT_EQ(split_and_simplify(line, {}, 0.0).front(), line);
}

TEST(SplitAndSimplify, NoisySquareKeepsFourCorners) {
  Xoshiro256 rng(31);
  std::vector<Point> path;
  const Point corner[4] = {{10, 10}, {30, 10}, {30, 30}, {10, 30}};
  std::set<std::size_t> corners;
  for (int side = 0; side < 4; ++side) {
    const Point a = corner[side], b = corner[(side + 1) % 4];
    const Point n{-(b.y - a.y) / 20.0, (b.x - a.x) / 20.0};
    corners.insert(path.size());
    path.push_back(a);
    for (int k = 1; k < 20; ++k) {
      const double s = k / 20.0, j = rng.uniform(-0.3, 0.3);
      path.push_back({a.x + s * (b.x - a.x) + j * n.x, a.y + s * (b.y - a.y) + j * n.y});
    }
  }
  corners.insert(path.size());
  path.push_back(corner[0]);

  const auto pieces = split_and_simplify(path, corners, 1.0);
  ASSERT_EQ(pieces.size(), 4u);
  std::set<std::pair<double, double>> vertices;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    EXPECT_EQ(pieces[i].size(), 2u);
    EXPECT_EQ(pieces[i].front(), corner[i]);
    EXPECT_EQ(pieces[i].back(), corner[(i + 1) % 4]);
    for (const Point& p : pieces[i]) vertices.insert({p.x, p.y});
  }
  EXPECT_EQ(vertices.size(), 4u);
}

// ---------------------------------------------------------------------------

TEST(ExtractPolygons, SingleCycleOverFullInterior) {
  SkeletonGraph g;
  g.nodes = {{2, 2}, {8, 2}, {8, 7}, {2, 7}};
  g.edges = {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
  const auto polys = extract_polygons(g, ProbRaster(10, 10, 1.0));
  ASSERT_EQ(polys.size(), 1u);
  EXPECT_DOUBLE_EQ(polys[0].score, 1.0);
  EXPECT_DOUBLE_EQ(signed_area(polys[0].ring), 30.0);
}

TEST(ExtractPolygons, EmptyGraph) { EXPECT_TRUE(extract_polygons({}, ProbRaster(5, 5, 1.0)).empty()); }

TEST(ExtractPolygons, SharedWallGivesTwoFacesWithCommonEdge) {
  const SkeletonGraph g = shared_wall_graph();

  // Faces by brute force: simple cycles that enclose no other node and no
  // midpoint of an edge off the cycle.
  int faces = 0;
  for (const auto& cyc : all_simple_cycles(g)) {
    Ring ring;
    // Order the cycle by walking it.
    const auto adj = g.adjacency();
    std::set<int> members(cyc.begin(), cyc.end());
    int prev = -1, cur = cyc[0];
    do {
      ring.push_back(g.nodes[cur]);
      int next = -1;
      for (int u : adj[cur])
        if (members.count(u) && u != prev) {
          next = u;
          break;
        }
      prev = cur;
      cur = next;
    } while (cur != cyc[0]);
    bool empty_inside = true;
    for (std::size_t v = 0; v < g.nodes.size(); ++v)
      if (!members.count(static_cast<int>(v)) && contains(ring, g.nodes[v])) empty_inside = false;
    for (const auto& [a, b] : g.edges) {
      const Point mid{(g.nodes[a].x + g.nodes[b].x) / 2, (g.nodes[a].y + g.nodes[b].y) / 2};
      bool on_cycle = false;
      for (std::size_t i = 0; i < ring.size(); ++i)
        on_cycle = on_cycle || point_segment_distance(mid, ring[i], ring[(i + 1) % ring.size()]) < 1e-12;
      if (!on_cycle && contains(ring, mid)) empty_inside = false;
    }
    faces += empty_inside ? 1 : 0;
  }
  EXPECT_EQ(faces, 2);

  const auto polys = extract_polygons(g, ProbRaster(10, 10, 1.0));
  ASSERT_EQ(static_cast<int>(polys.size()), faces);
  for (const auto& p : polys) {
    EXPECT_GT(signed_area(p.ring), 0.0);
    EXPECT_DOUBLE_EQ(area(p.ring), 4.0);
    EXPECT_EQ(std::count(p.ring.begin(), p.ring.end(), Point(4, 2)), 1);
    EXPECT_EQ(std::count(p.ring.begin(), p.ring.end(), Point(4, 4)), 1);
  }
}

TEST(ExtractPolygons, CrossingSegmentsThrow) {
  SkeletonGraph g;
  g.nodes = {{1, 1}, {5, 5}, {1, 5}, {5, 1}};
  g.edges = {{0, 1}, {2, 3}};
  EXPECT_EQ(find_crossing(g), (std::optional<std::pair<std::size_t, std::size_t>>{{0, 1}}));
  EXPECT_THROW(extract_polygons(g, ProbRaster(8, 8, 1.0)), DomainError);
}

TEST(InteriorScore, MeanOverEnclosedCenters) {
  ProbRaster f(10, 10, 0.0);
  for (int y = 2; y < 4; ++y)
    for (int x = 2; x < 6; ++x) f(y, x) = 1.0;
  const Ring r = {{2, 2}, {6, 2}, {6, 6}, {2, 6}};
  EXPECT_DOUBLE_EQ(interior_score(r, f), 0.5);
}

// ---------------------------------------------------------------------------

TEST(FilterPolygons, Examples) {
  const ScoredPolygon a{{{0, 0}, {4, 0}, {4, 4}, {0, 4}}, 0.9};
  const ScoredPolygon b{{{5, 0}, {9, 0}, {9, 4}, {5, 4}}, 0.3};
  const auto all = filter_polygons({a, b}, 0.0, 0.0);
  ASSERT_EQ(all.size(), 2u);
  EXPECT_EQ(all[0].ring, a.ring);
  EXPECT_EQ(all[1].ring, b.ring);
  const auto kept = filter_polygons({a, b}, 0.5, 0.0);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].score, 0.9);
}

TEST(FilterPolygons, MatchesPredicateOracle) {
  Xoshiro256 rng(99);
  std::vector<ScoredPolygon> polys;
  for (int i = 0; i < 200; ++i) {
    const double x = rng.uniform(0, 100), y = rng.uniform(0, 100);
    const double w = rng.uniform(0.5, 6), h = rng.uniform(0.5, 6);
    polys.push_back({{{x, y}, {x + w, y}, {x + w, y + h}, {x, y + h}}, rng.uniform()});
  }
  const auto out = filter_polygons(polys, 0.4, 6.0);
  std::vector<ScoredPolygon> expected;
  for (const auto& p : polys)
    if (p.score >= 0.4 && area(p.ring) >= 6.0) expected.push_back(p);
  ASSERT_EQ(out.size(), expected.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    EXPECT_EQ(out[i].ring, expected[i].ring);
    EXPECT_EQ(out[i].score, expected[i].score);
  }
}

// ---------------------------------------------------------------------------

TEST(Polygonize, AllZeroRastersGiveNothing) {
  EXPECT_TRUE(polygonize(ProbRaster(32, 32, 0.0), ProbRaster(32, 32, 0.0), ff::FrameField(32, 32), {}).empty());
}

TEST(Polygonize, GroundTruthRastersRecoverEveryInstance) {
  synth::SceneConfig c;
  c.seed = 0;
  const auto polys = synth::generate_scene(c);
  const auto gt = synth::rasterize(polys, c);
  const auto out = polygonize(gt.y_int, gt.y_edge, gt.ff_gt, {});
  int below = 0;
  double worst = 1.0;
  for (const Ring& r : polys) {
    const double iou = best_iou(out, r);
    worst = std::min(worst, iou);
    below += iou > 0.95 ? 0 : 1;
  }
  EXPECT_EQ(below, 0) << "instances at or below IoU 0.95: " << below << " of " << polys.size()
                      << ", worst " << worst;
}

TEST(Polygonize, NoisyRastersRecoverMostInstances) {
  synth::SceneConfig c;
  c.seed = 0;
  c.noise_sigma = 0.05;
  c.blur_radius = 0.0;
  const auto polys = synth::generate_scene(c);
  const auto d = synth::corrupt(synth::rasterize(polys, c), c);
  const auto out = polygonize(d.f_int, d.f_edge, d.ff, {});
  int good = 0;
  for (const Ring& r : polys) good += best_iou(out, r) > 0.85 ? 1 : 0;
  EXPECT_GE(good, 0.9 * static_cast<double>(polys.size())) << good << " of " << polys.size();
}

TEST(Polygonize, OutputRingsAreValidAndDeterministicAcrossThreads) {
  synth::SceneConfig c;
  c.seed = 5;
  c.noise_sigma = 0.1;
  const auto d = synth::corrupt(synth::rasterize(synth::generate_scene(c), c), c);
  const PolygonizeConfig cfg;
  set_thread_count(1);
  const auto one = polygonize(d.f_int, d.f_edge, d.ff, cfg);
  set_thread_count(4);
  const auto four = polygonize(d.f_int, d.f_edge, d.ff, cfg);
  set_thread_count(0);
  ASSERT_EQ(one.size(), four.size());
  ASSERT_FALSE(one.empty());
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].ring, four[i].ring);
    EXPECT_EQ(one[i].score, four[i].score);
    const Ring& r = one[i].ring;
    EXPECT_GE(r.size(), 3u);
    EXPECT_TRUE(is_valid_simple_ring(r));
    EXPECT_GT(signed_area(r), 0.0);
    EXPECT_GE(area(r), cfg.min_area);
    EXPECT_GE(one[i].score, cfg.min_prob);
    EXPECT_LE(one[i].score, 1.0);
    for (const Point& p : r) {
      EXPECT_GE(p.x, 0.0);
      EXPECT_GE(p.y, 0.0);
      EXPECT_LE(p.x, c.width);
      EXPECT_LE(p.y, c.height);
    }
  }
}

TEST(PolygonizeConfig, ValidateRejectsBadValues) {
  PolygonizeConfig c;
  EXPECT_NO_THROW(c.validate());
  c.min_prob = 1.5;
  EXPECT_THROW(c.validate(), DomainError);
  c = {};
  c.acm.lambda_data = c.acm.lambda_ff = c.acm.lambda_internal = 0.0;
  EXPECT_THROW(c.validate(), DomainError);
  c = {};
  c.acm.tol = 0.0;
  EXPECT_THROW(c.validate(), DomainError);
}
