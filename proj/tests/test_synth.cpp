#include <gtest/gtest.h>

#include <cmath>

#include "densepoly/losses.hpp"
#include "densepoly/metrics.hpp"
#include "densepoly/synth.hpp"

using namespace densepoly;
using namespace densepoly::synth;

namespace {

SceneConfig scene(std::uint64_t seed) {
  SceneConfig c;
  c.seed = seed;
  return c;
}

bool inside_any(const std::vector<Ring>& polys, Point p) {
  for (const Ring& r : polys)
    if (contains(r, p)) return true;
  return false;
}

}  // namespace

TEST(GenerateScene, DeterministicForASeed) {
  const auto a = generate_scene(scene(7));
  const auto b = generate_scene(scene(7));
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
  EXPECT_NE(generate_scene(scene(8)), a);
}

TEST(GenerateScene, SparseSceneHasNoOverlap) {
  SceneConfig c = scene(3);
  c.width = c.height = 512;
  c.target_density = 0.01;
  const auto polys = generate_scene(c);
  ASSERT_GE(polys.size(), 1u);
  for (std::size_t i = 0; i < polys.size(); ++i)
    for (std::size_t j = i + 1; j < polys.size(); ++j) EXPECT_LT(metrics::polygon_iou(polys[i], polys[j]), 1e-9);
}

TEST(GenerateScene, CoverageNearTargetByPixelCount) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    SceneConfig c = scene(seed);
    c.target_density = 0.5;
    const auto polys = generate_scene(c);
    int covered = 0;
    for (int y = 0; y < c.height; ++y)
      for (int x = 0; x < c.width; ++x) covered += inside_any(polys, {x + 0.5, y + 0.5}) ? 1 : 0;
    const double frac = covered / static_cast<double>(c.width * c.height);
    EXPECT_GE(frac, 0.4) << seed;
    EXPECT_LE(frac, 0.6) << seed;
    EXPECT_NEAR(coverage_fraction(polys, c.height, c.width), frac, 1e-12);
  }
}

TEST(GenerateScene, RingsAreSimpleDisjointAndShareExactWalls) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto polys = generate_scene(scene(seed));
    int sharing_pairs = 0;
    for (std::size_t i = 0; i < polys.size(); ++i) {
      ASSERT_TRUE(is_valid_simple_ring(polys[i]));
      EXPECT_GT(signed_area(polys[i]), 0.0);
      for (std::size_t j = i + 1; j < polys.size(); ++j) {
        const BBox a = bbox(polys[i]), b = bbox(polys[j]);
        if (!a.overlaps(b, 1.0)) continue;
        EXPECT_LT(metrics::polygon_iou(polys[i], polys[j]), 1e-9);
        if (ring_distance(polys[i], polys[j]) > 1e-9) continue;
        // Touching buildings share a wall whose end vertices appear verbatim in both.
        int common = 0;
        for (const Point& p : polys[i])
          for (const Point& q : polys[j]) common += (p == q) ? 1 : 0;
        EXPECT_GE(common, 2) << "seed " << seed << " pair " << i << "," << j;
        ++sharing_pairs;
      }
    }
    EXPECT_GT(sharing_pairs, 0) << seed;
  }
}

TEST(GenerateScene, UnreachableDensityThrows) {
  SceneConfig c = scene(1);
  c.target_density = 0.95;
  EXPECT_THROW(generate_scene(c), DomainError);
}

TEST(SceneConfig, ValidateRejectsBadKnobs) {
  SceneConfig c;
  c.target_density = 0.0;
  EXPECT_THROW(c.validate(), DomainError);
  c = {};
  c.edge_width = 0.5;
  EXPECT_THROW(c.validate(), DomainError);
  c = {};
  c.min_size = 10;
  c.max_size = 5;
  EXPECT_THROW(c.validate(), DomainError);
  c = {};
  c.noise_sigma = -0.1;
  EXPECT_THROW(c.validate(), DomainError);
}

// ---------------------------------------------------------------------------

TEST(Rasterize, AxisAlignedRectangleHasCrossFieldOnEdges) {
  SceneConfig c = scene(0);
  c.width = c.height = 32;
  const Ring rect = {{8.5, 8.5}, {24.5, 8.5}, {24.5, 20.5}, {8.5, 20.5}};
  const GroundTruth gt = rasterize({rect}, c);
  int edges = 0;
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) {
      EXPECT_EQ(gt.y_int(y, x), contains(rect, {x + 0.5, y + 0.5}) ? 1.0 : 0.0);
      if (gt.y_edge(y, x) == 0.0) continue;
      ++edges;
      EXPECT_NEAR(gt.ff_gt.k0(y, x).real(), -1.0, 1e-12);
      EXPECT_NEAR(gt.ff_gt.k0(y, x).imag(), 0.0, 1e-12);
      EXPECT_EQ(gt.ff_gt.k1(y, x), Complex(0.0, 0.0));
    }
  }
  EXPECT_GT(edges, 0);
}

TEST(Rasterize, DiagonalSquareFieldFlipsSign) {
  SceneConfig c = scene(0);
  c.width = c.height = 32;
  const Ring diamond = {{16.5, 6.5}, {26.5, 16.5}, {16.5, 26.5}, {6.5, 16.5}};
  const GroundTruth gt = rasterize({diamond}, c);
  int checked = 0;
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) {
      if (gt.y_edge(y, x) == 0.0) continue;
      // Pixels nearest a vertex can see either incident edge; both are diagonal.
      EXPECT_NEAR(gt.ff_gt.k0(y, x).real(), 1.0, 1e-12);
      EXPECT_NEAR(gt.ff_gt.k0(y, x).imag(), 0.0, 1e-12);
      ++checked;
    }
  }
  EXPECT_GT(checked, 20);
}

TEST(Rasterize, RandomSceneIsAlignedAndConsistent) {
  const SceneConfig c = scene(21);
  const auto polys = generate_scene(c);
  const GroundTruth gt = rasterize(polys, c);
  EXPECT_LT(losses::align_loss(gt.ff_gt, gt.tang, gt.y_edge), 1e-9);
  EXPECT_LT(losses::align90_loss(gt.ff_gt, gt.tang, gt.y_edge), 1e-9);
  for (int y = 0; y < c.height; ++y) {
    for (int x = 0; x < c.width; ++x) {
      if (gt.y_int(y, x) == 1.0) {
        EXPECT_TRUE(inside_any(polys, {x + 0.5, y + 0.5}));
      }
      if (gt.y_edge(y, x) == 1.0) {
        EXPECT_GE(gt.tang(y, x), 0.0);
        EXPECT_LT(gt.tang(y, x), kPi);
      }
    }
  }
  // The interior map's gradient is about 0.5 across a wall, so the matching
  // edge indicator is half of y_edge.
  ProbRaster half_edge = gt.y_edge;
  for (double& v : half_edge.values()) v *= 0.5;
  EXPECT_LT(losses::int_edge_loss(gt.y_int, half_edge), 0.05);
}

// ---------------------------------------------------------------------------

TEST(Corrupt, ZeroNoiseZeroBlurIsIdentity) {
  SceneConfig c = scene(4);
  c.noise_sigma = 0.0;
  c.blur_radius = 0.0;
  const GroundTruth gt = rasterize(generate_scene(c), c);
  const Degraded d = corrupt(gt, c);
  EXPECT_EQ(d.f_int, gt.y_int);
  EXPECT_EQ(d.f_edge, gt.y_edge);
  EXPECT_EQ(d.ff.k0, gt.ff_gt.k0);
  EXPECT_EQ(d.ff.k1, gt.ff_gt.k1);
}

TEST(Corrupt, NoiseMeanAbsoluteDeviationOnMidGray) {
  // Oracle: E|N(0, s)| = s sqrt(2 / pi) ~ 0.0399 for s = 0.05; a mid-gray map
  // keeps the [0, 1] clamp out of reach.
  SceneConfig c = scene(5);
  c.width = c.height = 400;
  c.noise_sigma = 0.05;
  c.blur_radius = 0.0;
  GroundTruth gt;
  gt.y_int = ProbRaster(400, 400, 0.5);
  gt.y_edge = ProbRaster(400, 400, 0.5);
  gt.tang = Raster<double>(400, 400, 0.0);
  gt.ff_gt = ff::FrameField(400, 400);
  const Degraded d = corrupt(gt, c);
  double mad = 0.0;
  for (std::size_t i = 0; i < d.f_int.size(); ++i) mad += std::abs(d.f_int.values()[i] - 0.5);
  mad /= static_cast<double>(d.f_int.size());
  EXPECT_GE(mad, 0.03);
  EXPECT_LE(mad, 0.05);
  EXPECT_NEAR(mad, 0.05 * std::sqrt(2.0 / kPi), 1e-3);
}

TEST(Corrupt, DeterministicAndClamped) {
  SceneConfig c = scene(6);
  c.noise_sigma = 0.2;
  const GroundTruth gt = rasterize(generate_scene(c), c);
  const Degraded a = corrupt(gt, c), b = corrupt(gt, c);
  EXPECT_EQ(a.f_int, b.f_int);
  EXPECT_EQ(a.f_edge, b.f_edge);
  EXPECT_EQ(a.ff.k0, b.ff.k0);
  for (double v : a.f_edge.values()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(GaussianBlur, PreservesMassAndConstants) {
  ProbRaster r(20, 20, 0.0);
  r(10, 10) = 1.0;
  const ProbRaster b = gaussian_blur(r, 1.5);
  double sum = 0.0;
  for (double v : b.values()) sum += v;
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_NEAR(b(10, 11), b(11, 10), 1e-15);
  const ProbRaster flat = gaussian_blur(ProbRaster(9, 9, 0.3), 2.0);
  for (double v : flat.values()) EXPECT_NEAR(v, 0.3, 1e-15);
  EXPECT_EQ(gaussian_blur(r, 0.0), r);
}
