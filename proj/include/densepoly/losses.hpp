#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "densepoly/frame_field.hpp"
#include "densepoly/geometry.hpp"
#include "densepoly/raster.hpp"

namespace densepoly::losses {

using ff::FrameField;

inline constexpr double kDefaultClampEps = 1e-7;
inline constexpr double kDefaultSmoothEps = 1.0;
inline constexpr double kDefaultSegMix = 0.25;
inline constexpr double kDefaultGradEps = 1e-6;

/// Prediction, binary ground truth and optional per-pixel BCE weights.
struct SegPair {
  const ProbRaster& pred;
  const ProbRaster& gt;
  const ProbRaster* weight = nullptr;
};

/// Branch decisions taken while evaluating a loss. Two evaluations with equal
/// logs ran through the same smooth piece of the function.
using BranchLog = std::vector<std::uint8_t>;

double bce_loss(const SegPair& p, double clamp_eps = kDefaultClampEps, BranchLog* log = nullptr);
double dice_loss(const SegPair& p, double smooth_eps = kDefaultSmoothEps);

/// c * BCE + (1 - c) * Dice; serves both the interior and edge maps.
double combined_seg_loss(const SegPair& p, double c = kDefaultSegMix,
                         double clamp_eps = kDefaultClampEps,
                         double smooth_eps = kDefaultSmoothEps, BranchLog* log = nullptr);

/// Mean over all pixels of y_edge * |f(e^{i theta}; k0, k1)|^2.
double align_loss(const FrameField& field, const Raster<double>& tang, const ProbRaster& y_edge);

/// align_loss against the tangent rotated by a quarter turn.
double align90_loss(const FrameField& field, const Raster<double>& tang, const ProbRaster& y_edge);

/// The tangent rotation used by align90_loss, exposed for identity checks.
double quarter_turn(double theta);

/// Mean of |grad k0|^2 + |grad k1|^2 over the raster.
double smooth_loss(const FrameField& field);

/// Mean over pixels with |grad mask| > grad_eps of
/// |grad mask| * alignment_energy(direction of grad mask).
double mask_align_loss(const FrameField& field, const ProbRaster& mask,
                       double grad_eps = kDefaultGradEps, BranchLog* log = nullptr);

/// Mean of max(1 - f_int, |grad f_int|) * | |grad f_int| - f_edge |.
double int_edge_loss(const ProbRaster& f_int, const ProbRaster& f_edge, BranchLog* log = nullptr);

struct LossComponents {
  double l_int = 0.0;
  double l_edge = 0.0;
  double l_align = 0.0;
  double l_align90 = 0.0;
  double l_smooth = 0.0;
  double l_int_align = 0.0;
  double l_edge_align = 0.0;
  double l_int_edge = 0.0;

  /// Regularizers, weighted 1 / (2 sigma^2).
  double regularizer_sum() const { return l_smooth + l_int_align + l_edge_align + l_int_edge; }
  /// Classification terms other than the edge loss, weighted 1 / sigma^2.
  double classification_sum() const { return l_int + l_align + l_align90; }

  void validate() const;
};

/// Adaptive total with a single shared sigma, plus ln(sigma).
double total_loss(const LossComponents& lc, double sigma);

/// Closed-form stationary point of total_loss in sigma.
double optimal_sigma(const LossComponents& lc);

/// Per-pixel BCE weights 1 + w0 * exp(-(d1 + d2)^2 / (2 sigma^2)), where d1 and
/// d2 are the distances from the pixel center to the two nearest polygons.
ProbRaster distance_weight_map(const std::vector<Ring>& polygons, int height, int width,
                               double w0 = 10.0, double sigma = 5.0);

/// Inputs needed to compute every component from a prediction triple.
struct LossInputs {
  const ProbRaster& f_int;
  const ProbRaster& f_edge;
  const FrameField& field;
  const ProbRaster& y_int;
  const ProbRaster& y_edge;
  const Raster<double>& tang;
  const ProbRaster* int_weight = nullptr;
};

struct LossParams {
  double seg_mix = kDefaultSegMix;
  double clamp_eps = kDefaultClampEps;
  double smooth_eps = kDefaultSmoothEps;
  double grad_eps = kDefaultGradEps;
};

LossComponents compute_components(const LossInputs& in, const LossParams& params = {});

// ---------------------------------------------------------------------------
// Analytic gradients, used by the finite-difference checker.

ProbRaster bce_grad(const SegPair& p, double clamp_eps = kDefaultClampEps);
ProbRaster dice_grad(const SegPair& p, double smooth_eps = kDefaultSmoothEps);
ProbRaster combined_seg_grad(const SegPair& p, double c = kDefaultSegMix,
                             double clamp_eps = kDefaultClampEps,
                             double smooth_eps = kDefaultSmoothEps);

/// Gradient with respect to the complex planes, as d/dRe + i d/dIm.
struct FieldGrad {
  Raster<Complex> dk0;
  Raster<Complex> dk1;
};

FieldGrad align_grad(const FrameField& field, const Raster<double>& tang, const ProbRaster& y_edge);
FieldGrad align90_grad(const FrameField& field, const Raster<double>& tang,
                       const ProbRaster& y_edge);
FieldGrad smooth_grad(const FrameField& field);
FieldGrad mask_align_field_grad(const FrameField& field, const ProbRaster& mask,
                                double grad_eps = kDefaultGradEps);
ProbRaster mask_align_mask_grad(const FrameField& field, const ProbRaster& mask,
                                double grad_eps = kDefaultGradEps);

struct IntEdgeGrad {
  ProbRaster d_int;
  ProbRaster d_edge;
};
IntEdgeGrad int_edge_grad(const ProbRaster& f_int, const ProbRaster& f_edge);

// ---------------------------------------------------------------------------
// Finite-difference verification.

/// A loss as a function of one flat parameter vector, with the rest of its
/// inputs bound. value() may fill a BranchLog describing its smooth piece.
struct DifferentiableLoss {
  std::string name;
  std::function<double(std::span<const double>, BranchLog*)> value;
  std::function<std::vector<double>(std::span<const double>)> gradient;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  /// Probed coordinates whose +/- step straddles a kink (branch change).
  std::vector<std::size_t> skipped;
};

/// Compares the analytic gradient with central differences at `probes`
/// seeded random coordinates. Relative error uses
/// |a - n| / max(|a|, |n|, abs_floor). Throws DomainError when the loss is
/// non-finite at a probe point or step is outside (0, 1e-2].
GradCheckReport finite_diff_grad_check(const DifferentiableLoss& loss,
                                       std::span<const double> inputs, double step,
                                       std::uint64_t seed = 0, std::size_t probes = 64,
                                       double abs_floor = 1e-8);

/// Flat parameter layout for frame fields: Re k0, Im k0, Re k1, Im k1 planes.
std::vector<double> flatten_field(const FrameField& field);
FrameField unflatten_field(std::span<const double> flat, int height, int width);

DifferentiableLoss bce_target(const ProbRaster& gt, const ProbRaster* weight,
                              double clamp_eps = kDefaultClampEps);
DifferentiableLoss dice_target(const ProbRaster& gt, double smooth_eps = kDefaultSmoothEps);
DifferentiableLoss combined_seg_target(const ProbRaster& gt, double c = kDefaultSegMix);
DifferentiableLoss align_target(const Raster<double>& tang, const ProbRaster& y_edge);
DifferentiableLoss align90_target(const Raster<double>& tang, const ProbRaster& y_edge);
DifferentiableLoss smooth_target(int height, int width);
DifferentiableLoss mask_align_field_target(const ProbRaster& mask, double grad_eps = kDefaultGradEps);
DifferentiableLoss mask_align_mask_target(const FrameField& field, double grad_eps = kDefaultGradEps);
/// Parameters: f_int plane followed by f_edge plane.
DifferentiableLoss int_edge_target(int height, int width);

}  // namespace densepoly::losses
