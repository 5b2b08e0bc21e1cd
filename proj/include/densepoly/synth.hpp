#pragma once

#include <cstdint>
#include <vector>

#include "densepoly/frame_field.hpp"
#include "densepoly/geometry.hpp"
#include "densepoly/raster.hpp"

namespace densepoly::synth {

/// Knobs for the dense-scene generator. Building vertices sit on pixel
/// centers (k + 0.5), matching annotations given as pixel-coordinate contours.
struct SceneConfig {
  std::uint64_t seed = 0;
  int width = 256;
  int height = 256;
  double target_density = 0.45;
  int min_size = 6;
  int max_size = 30;
  double rotation = kPi / 12.0;  // per-block rotation drawn from [-rotation, rotation]
  double shared_wall_prob = 0.3;
  double l_shape_prob = 0.2;
  int min_gap = 5;  // clearance between buildings that do not share a wall
  double edge_width = 2.0;
  double noise_sigma = 0.0;
  double blur_radius = 0.5;  // Gaussian standard deviation in pixels

  /// Throws DomainError on any invariant violation.
  void validate() const;
};

struct GroundTruth {
  std::vector<Ring> polygons;
  ProbRaster y_int;
  ProbRaster y_edge;
  Raster<double> tang;  // unsigned tangent angle; 0 where y_edge is 0
  ff::FrameField ff_gt;
};

/// Seeded packing of rotated rectangles and L-shapes in jittered rows.
/// Neighbors within a block share an exact wall with probability
/// shared_wall_prob; the shared segment's vertices are identical in both
/// rings. Throws DomainError when the target density cannot be reached.
std::vector<Ring> generate_scene(const SceneConfig& cfg);

/// Pixel-center rasterization plus tangent angles and the ground-truth frame
/// field (k1 = 0, k0 = -e^{4 i theta} on edges, nearest-edge fill elsewhere).
GroundTruth rasterize(const std::vector<Ring>& polygons, const SceneConfig& cfg);

struct Degraded {
  ProbRaster f_int;
  ProbRaster f_edge;
  ff::FrameField ff;
};

/// Gaussian blur then seeded additive noise on both maps (clamped to [0, 1]);
/// complex Gaussian noise of the same sigma on each frame-field coefficient.
Degraded corrupt(const GroundTruth& gt, const SceneConfig& cfg);

/// Separable Gaussian blur with clamp-to-edge borders; identity for sigma 0.
ProbRaster gaussian_blur(const ProbRaster& r, double sigma);

/// Fraction of pixel centers covered by any polygon.
double coverage_fraction(const std::vector<Ring>& polygons, int height, int width);

}  // namespace densepoly::synth
