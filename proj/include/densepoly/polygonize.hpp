#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "densepoly/frame_field.hpp"
#include "densepoly/geometry.hpp"
#include "densepoly/raster.hpp"

namespace densepoly::poly {

using BinaryRaster = Raster<std::uint8_t>;

/// Undirected graph with sub-pixel node positions.
struct SkeletonGraph {
  std::vector<Point> nodes;
  std::vector<std::pair<int, int>> edges;

  std::vector<std::vector<int>> adjacency() const;
  std::vector<int> degrees() const;
  /// Throws DomainError on duplicate nodes (within 1e-6 px), self loops,
  /// repeated edges, bad indices or nodes outside [0, width] x [0, height].
  void validate(int height, int width) const;
};

/// Zhang-Suen thinning to a one-pixel-wide skeleton.
BinaryRaster thin(const BinaryRaster& mask);

/// Thinning followed by graph construction. Nodes sit at skeleton pixel
/// centers; 4-neighbors are always linked and diagonal neighbors only when no
/// shared 4-neighbor is set. Each 8-connected cluster of junction pixels
/// (degree >= 3) collapses into one node at its centroid.
SkeletonGraph skeletonize(const BinaryRaster& edge_binary);

/// Keeps only the 2-edge-connected part: repeatedly drops degree <= 1 nodes
/// and bridges, then removes isolated nodes.
SkeletonGraph prune_to_cycles(const SkeletonGraph& g);

struct AcmParams {
  double lambda_data = 1.0;
  double lambda_ff = 1.0;
  double lambda_internal = 0.01;
  double step0 = 0.5;
  int max_iters = 300;
  double tol = 1e-3;
  int max_halvings = 20;

  void validate() const;
};

struct AcmTrace {
  /// Per connected component: initial energy followed by every accepted iterate.
  std::vector<std::vector<double>> energies;
  /// Largest iteration count over all components.
  int iterations = 0;
};

double acm_energy(const SkeletonGraph& g, const ProbRaster& f_edge, const ff::FrameField& field,
                  const AcmParams& p);

/// Gradient of acm_energy with respect to every node position.
std::vector<Point> acm_gradient(const SkeletonGraph& g, const ProbRaster& f_edge,
                                const ff::FrameField& field, const AcmParams& p);

/// Backtracking gradient descent on acm_energy, one connected component at a
/// time. Throws DomainError naming the node when the energy becomes NaN.
SkeletonGraph acm_refine(const SkeletonGraph& g, const ProbRaster& f_int, const ProbRaster& f_edge,
                         const ff::FrameField& field, const AcmParams& p,
                         AcmTrace* trace = nullptr);

inline constexpr double kDefaultCornerAngle = kPi / 8.0;

/// Indices of corner nodes. For an open path only interior nodes qualify; a
/// closed path treats every node as interior. Zero-length segments are
/// skipped when picking the incident tangents.
std::set<std::size_t> detect_corners(const std::vector<Point>& path, const ff::FrameField& field,
                                     double angle_thresh = kDefaultCornerAngle, bool closed = false,
                                     double eps_degenerate = ff::kDefaultDegenerateEps);

/// Ramer-Douglas-Peucker on an open polyline; both ends are kept.
std::vector<Point> rdp(const std::vector<Point>& line, double tol);

/// Cuts an open path at the corners and simplifies each piece. Pieces share
/// their corner endpoints.
std::vector<std::vector<Point>> split_and_simplify(const std::vector<Point>& path,
                                                   const std::set<std::size_t>& corners,
                                                   double tol);

struct ScoredPolygon {
  Ring ring;
  double score = 0.0;
};

/// Mean interior probability over pixel centers inside the ring; falls back
/// to a bilinear sample at the vertex mean when no center is enclosed.
double interior_score(const Ring& ring, const ProbRaster& f_int);

/// First pair of edges (by index) that cross, overlap, or touch away from a
/// shared node.
std::optional<std::pair<std::size_t, std::size_t>> find_crossing(const SkeletonGraph& g);

/// Bounded faces of a planar straight-line graph by a leftmost-turn walk,
/// counter-clockwise, each scored by interior_score. Faces with score 0 are
/// dropped. Throws DomainError naming a crossing segment pair.
std::vector<ScoredPolygon> extract_polygons(const SkeletonGraph& g, const ProbRaster& f_int);

std::vector<ScoredPolygon> filter_polygons(const std::vector<ScoredPolygon>& polys, double min_prob,
                                           double min_area);

struct PolygonizeConfig {
  double edge_thresh = 0.5;
  double min_prob = 0.5;
  double min_area = 4.0;
  double corner_angle_thresh = kDefaultCornerAngle;
  double rdp_tol = 1.0;
  double eps_degenerate = ff::kDefaultDegenerateEps;
  AcmParams acm;

  void validate() const;
};

/// Replaces every chain of degree-2 nodes by its corner-split, simplified
/// polyline. Junctions and endpoints keep their positions.
SkeletonGraph simplify_graph(const SkeletonGraph& g, const ff::FrameField& field,
                             const PolygonizeConfig& cfg);

struct PolygonizeTrace {
  SkeletonGraph skeleton;
  SkeletonGraph refined;
  SkeletonGraph simplified;
  AcmTrace acm;
};

std::vector<ScoredPolygon> polygonize(const ProbRaster& f_int, const ProbRaster& f_edge,
                                      const ff::FrameField& field, const PolygonizeConfig& cfg,
                                      PolygonizeTrace* trace = nullptr);

}  // namespace densepoly::poly
