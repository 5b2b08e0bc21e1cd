#include "densepoly/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "densepoly/rng.hpp"

namespace densepoly::losses {

namespace {

using ff::Direction;
using ff::FrameCoeffs;

void require_probabilities(const ProbRaster& r, const char* what) {
  for (double v : r.values()) {
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError(std::string(what) + ": values must lie in [0, 1]");
  }
}

void require_binary(const ProbRaster& r, const char* what) {
  for (double v : r.values()) {
    if (v != 0.0 && v != 1.0) throw DomainError(std::string(what) + ": values must be 0 or 1");
  }
}

void require_finite(const ProbRaster& r, const char* what) {
  for (double v : r.values()) {
    if (!std::isfinite(v)) throw DomainError(std::string(what) + ": non-finite value");
  }
}

void validate_seg_pair(const SegPair& p, const char* what) {
  require_same_shape(p.pred, p.gt, what);
  require_probabilities(p.pred, what);
  require_binary(p.gt, what);
  if (p.weight != nullptr) {
    require_same_shape(p.pred, *p.weight, what);
    for (double w : p.weight->values()) {
      if (!(w > 0.0) || !std::isfinite(w)) throw DomainError(std::string(what) + ": weights must be positive");
    }
  }
}

double inv_pixels(const ProbRaster& r) { return 1.0 / static_cast<double>(r.size()); }

// g(u) = u^2 + k1 u + k0 for u = z^2 on the unit circle.
Complex field_poly_u(Complex u, const FrameCoeffs& c) { return u * u + c.k1 * u + c.k0; }

double align_impl(const FrameField& field, const Raster<double>& tang, const ProbRaster& y_edge,
                  bool quarter) {
  field.validate();
  require_same_shape(field.k0, tang, "align_loss");
  require_same_shape(field.k0, y_edge, "align_loss");
  double sum = 0.0;
  for (int y = 0; y < y_edge.height(); ++y) {
    for (int x = 0; x < y_edge.width(); ++x) {
      const double mask = y_edge(y, x);
      if (mask == 0.0) continue;
      const double theta = quarter ? quarter_turn(tang(y, x)) : tang(y, x);
      sum += mask * ff::alignment_energy_at(theta, field.at(y, x));
    }
  }
  return sum * inv_pixels(y_edge);
}

FieldGrad align_grad_impl(const FrameField& field, const Raster<double>& tang,
                          const ProbRaster& y_edge, bool quarter) {
  field.validate();
  require_same_shape(field.k0, tang, "align_loss");
  require_same_shape(field.k0, y_edge, "align_loss");
  FieldGrad g{Raster<Complex>(y_edge.height(), y_edge.width()),
              Raster<Complex>(y_edge.height(), y_edge.width())};
  const double scale = inv_pixels(y_edge);
  for (int y = 0; y < y_edge.height(); ++y) {
    for (int x = 0; x < y_edge.width(); ++x) {
      const double mask = y_edge(y, x);
      if (mask == 0.0) continue;
      const double theta = quarter ? quarter_turn(tang(y, x)) : tang(y, x);
      const Complex u = std::polar(1.0, 2.0 * theta);
      const Complex val = field_poly_u(u, field.at(y, x));
      g.dk0(y, x) = 2.0 * scale * mask * val;
      g.dk1(y, x) = 2.0 * scale * mask * val * std::conj(u);
    }
  }
  return g;
}

Raster<double> real_plane(const Raster<Complex>& c) {
  Raster<double> r(c.height(), c.width());
  for (std::size_t i = 0; i < c.size(); ++i) r.values()[i] = c.values()[i].real();
  return r;
}

Raster<double> imag_plane(const Raster<Complex>& c) {
  Raster<double> r(c.height(), c.width());
  for (std::size_t i = 0; i < c.size(); ++i) r.values()[i] = c.values()[i].imag();
  return r;
}

double squared_gradient_sum(const Raster<double>& plane) {
  const Raster<Vec2> g = ff::spatial_gradient(plane);
  double sum = 0.0;
  for (const Vec2& v : g.values()) sum += v.x * v.x + v.y * v.y;
  return sum;
}

// d/d(plane) of sum |grad plane|^2, scaled.
Raster<double> squared_gradient_sum_grad(const Raster<double>& plane, double scale) {
  Raster<Vec2> g = ff::spatial_gradient(plane);
  for (Vec2& v : g.values()) {
    v.x *= 2.0 * scale;
    v.y *= 2.0 * scale;
  }
  return ff::spatial_gradient_adjoint(g);
}

}  // namespace

double quarter_turn(double theta) { return Direction::canonical_angle(theta + 0.5 * kPi); }

double bce_loss(const SegPair& p, double clamp_eps, BranchLog* log) {
  if (!(clamp_eps > 0.0 && clamp_eps < 0.5)) throw DomainError("bce_loss: clamp_eps must lie in (0, 0.5)");
  validate_seg_pair(p, "bce_loss");
  double weighted = 0.0;
  double total_weight = 0.0;
  const auto pred = p.pred.values();
  const auto gt = p.gt.values();
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double w = p.weight != nullptr ? p.weight->values()[i] : 1.0;
    const double q = std::clamp(pred[i], clamp_eps, 1.0 - clamp_eps);
    if (log != nullptr) {
      log->push_back(pred[i] < clamp_eps ? 0 : (pred[i] > 1.0 - clamp_eps ? 2 : 1));
    }
    weighted += -w * (gt[i] * std::log(q) + (1.0 - gt[i]) * std::log(1.0 - q));
    total_weight += w;
  }
  return total_weight > 0.0 ? weighted / total_weight : 0.0;
}

ProbRaster bce_grad(const SegPair& p, double clamp_eps) {
  validate_seg_pair(p, "bce_loss");
  ProbRaster g(p.pred.height(), p.pred.width(), 0.0);
  double total_weight = 0.0;
  for (std::size_t i = 0; i < p.pred.size(); ++i) {
    total_weight += p.weight != nullptr ? p.weight->values()[i] : 1.0;
  }
  for (std::size_t i = 0; i < p.pred.size(); ++i) {
    const double v = p.pred.values()[i];
    if (v < clamp_eps || v > 1.0 - clamp_eps) continue;
    const double w = p.weight != nullptr ? p.weight->values()[i] : 1.0;
    const double y = p.gt.values()[i];
    g.values()[i] = w * (-y / v + (1.0 - y) / (1.0 - v)) / total_weight;
  }
  return g;
}

double dice_loss(const SegPair& p, double smooth_eps) {
  validate_seg_pair(p, "dice_loss");
  double inter = 0.0, sum_pred = 0.0, sum_gt = 0.0;
  for (std::size_t i = 0; i < p.pred.size(); ++i) {
    const double a = p.pred.values()[i];
    const double b = p.gt.values()[i];
    inter += a * b;
    sum_pred += a;
    sum_gt += b;
  }
  const double denom = sum_pred + sum_gt + smooth_eps;
  if (denom == 0.0) return 0.0;
  return 1.0 - (2.0 * inter + smooth_eps) / denom;
}

ProbRaster dice_grad(const SegPair& p, double smooth_eps) {
  validate_seg_pair(p, "dice_loss");
  double inter = 0.0, sum_pred = 0.0, sum_gt = 0.0;
  for (std::size_t i = 0; i < p.pred.size(); ++i) {
    inter += p.pred.values()[i] * p.gt.values()[i];
    sum_pred += p.pred.values()[i];
    sum_gt += p.gt.values()[i];
  }
  const double denom = sum_pred + sum_gt + smooth_eps;
  const double numer = 2.0 * inter + smooth_eps;
  ProbRaster g(p.pred.height(), p.pred.width(), 0.0);
  for (std::size_t i = 0; i < p.pred.size(); ++i) {
    g.values()[i] = -(2.0 * p.gt.values()[i] * denom - numer) / (denom * denom);
  }
  return g;
}

double combined_seg_loss(const SegPair& p, double c, double clamp_eps, double smooth_eps,
                         BranchLog* log) {
  if (!(c >= 0.0 && c <= 1.0)) throw DomainError("combined_seg_loss: c must lie in [0, 1]");
  const double bce = bce_loss(p, clamp_eps, log);
  if (c == 1.0) return bce;
  return c * bce + (1.0 - c) * dice_loss(p, smooth_eps);
}

ProbRaster combined_seg_grad(const SegPair& p, double c, double clamp_eps, double smooth_eps) {
  ProbRaster g = bce_grad(p, clamp_eps);
  const ProbRaster d = dice_grad(p, smooth_eps);
  for (std::size_t i = 0; i < g.size(); ++i) g.values()[i] = c * g.values()[i] + (1.0 - c) * d.values()[i];
  return g;
}

double align_loss(const FrameField& field, const Raster<double>& tang, const ProbRaster& y_edge) {
  return align_impl(field, tang, y_edge, false);
}

double align90_loss(const FrameField& field, const Raster<double>& tang, const ProbRaster& y_edge) {
  return align_impl(field, tang, y_edge, true);
}

FieldGrad align_grad(const FrameField& field, const Raster<double>& tang, const ProbRaster& y_edge) {
  return align_grad_impl(field, tang, y_edge, false);
}

FieldGrad align90_grad(const FrameField& field, const Raster<double>& tang,
                       const ProbRaster& y_edge) {
  return align_grad_impl(field, tang, y_edge, true);
}

double smooth_loss(const FrameField& field) {
  field.validate();
  const double sum = squared_gradient_sum(real_plane(field.k0)) +
                     squared_gradient_sum(imag_plane(field.k0)) +
                     squared_gradient_sum(real_plane(field.k1)) +
                     squared_gradient_sum(imag_plane(field.k1));
  return sum / static_cast<double>(field.k0.size());
}

FieldGrad smooth_grad(const FrameField& field) {
  field.validate();
  const double scale = 1.0 / static_cast<double>(field.k0.size());
  const Raster<double> a = squared_gradient_sum_grad(real_plane(field.k0), scale);
  const Raster<double> b = squared_gradient_sum_grad(imag_plane(field.k0), scale);
  const Raster<double> c = squared_gradient_sum_grad(real_plane(field.k1), scale);
  const Raster<double> d = squared_gradient_sum_grad(imag_plane(field.k1), scale);
  FieldGrad g{Raster<Complex>(field.height(), field.width()),
              Raster<Complex>(field.height(), field.width())};
  for (std::size_t i = 0; i < g.dk0.size(); ++i) {
    g.dk0.values()[i] = {a.values()[i], b.values()[i]};
    g.dk1.values()[i] = {c.values()[i], d.values()[i]};
  }
  return g;
}

double mask_align_loss(const FrameField& field, const ProbRaster& mask, double grad_eps,
                       BranchLog* log) {
  field.validate();
  require_same_shape(field.k0, mask, "mask_align_loss");
  require_finite(mask, "mask_align_loss");
  const Raster<Vec2> grad = ff::spatial_gradient(mask);
  double sum = 0.0;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      const Vec2 g = grad(y, x);
      const double mag = std::hypot(g.x, g.y);
      const bool active = mag > grad_eps;
      if (log != nullptr) log->push_back(active ? 1 : 0);
      if (!active) continue;
      sum += mag * ff::alignment_energy_at(std::atan2(g.y, g.x), field.at(y, x));
    }
  }
  return sum * inv_pixels(mask);
}

FieldGrad mask_align_field_grad(const FrameField& field, const ProbRaster& mask, double grad_eps) {
  field.validate();
  require_same_shape(field.k0, mask, "mask_align_loss");
  const Raster<Vec2> grad = ff::spatial_gradient(mask);
  const double scale = inv_pixels(mask);
  FieldGrad out{Raster<Complex>(mask.height(), mask.width()),
                Raster<Complex>(mask.height(), mask.width())};
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      const Vec2 g = grad(y, x);
      const double mag = std::hypot(g.x, g.y);
      if (!(mag > grad_eps)) continue;
      const Complex u = std::polar(1.0, 2.0 * std::atan2(g.y, g.x));
      const Complex val = field_poly_u(u, field.at(y, x));
      out.dk0(y, x) = 2.0 * scale * mag * val;
      out.dk1(y, x) = 2.0 * scale * mag * val * std::conj(u);
    }
  }
  return out;
}

ProbRaster mask_align_mask_grad(const FrameField& field, const ProbRaster& mask, double grad_eps) {
  field.validate();
  require_same_shape(field.k0, mask, "mask_align_loss");
  const Raster<Vec2> grad = ff::spatial_gradient(mask);
  const double scale = inv_pixels(mask);
  Raster<Vec2> upstream(mask.height(), mask.width());
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      const Vec2 g = grad(y, x);
      const double mag = std::hypot(g.x, g.y);
      if (!(mag > grad_eps)) continue;
      // T = |w| G(theta) with w = gx + i gy and G(theta) = |g(e^{2 i theta})|^2.
      const FrameCoeffs c = field.at(y, x);
      const Complex u = std::polar(1.0, 2.0 * std::atan2(g.y, g.x));
      const Complex val = field_poly_u(u, c);
      const double energy = std::norm(val);
      const Complex dval_dtheta = (2.0 * u + c.k1) * Complex(0.0, 2.0) * u;
      const double denergy = 2.0 * (std::conj(val) * dval_dtheta).real();
      upstream(y, x) = {scale * (g.x * energy - g.y * denergy) / mag,
                        scale * (g.y * energy + g.x * denergy) / mag};
    }
  }
  return ff::spatial_gradient_adjoint(upstream);
}

double int_edge_loss(const ProbRaster& f_int, const ProbRaster& f_edge, BranchLog* log) {
  require_same_shape(f_int, f_edge, "int_edge_loss");
  require_finite(f_int, "int_edge_loss");
  require_finite(f_edge, "int_edge_loss");
  const Raster<Vec2> grad = ff::spatial_gradient(f_int);
  double sum = 0.0;
  for (std::size_t i = 0; i < f_int.size(); ++i) {
    const Vec2 g = grad.values()[i];
    const double n = std::hypot(g.x, g.y);
    const double a = 1.0 - f_int.values()[i];
    const double diff = n - f_edge.values()[i];
    if (log != nullptr) {
      log->push_back(static_cast<std::uint8_t>((a > n ? 1 : 0) | (diff > 0.0 ? 2 : 0) |
                                               (n == 0.0 ? 4 : 0)));
    }
    sum += std::max(a, n) * std::abs(diff);
  }
  return sum * inv_pixels(f_int);
}

IntEdgeGrad int_edge_grad(const ProbRaster& f_int, const ProbRaster& f_edge) {
  require_same_shape(f_int, f_edge, "int_edge_loss");
  const Raster<Vec2> grad = ff::spatial_gradient(f_int);
  const double scale = inv_pixels(f_int);
  IntEdgeGrad out{ProbRaster(f_int.height(), f_int.width(), 0.0),
                  ProbRaster(f_int.height(), f_int.width(), 0.0)};
  Raster<Vec2> upstream(f_int.height(), f_int.width());
  for (std::size_t i = 0; i < f_int.size(); ++i) {
    const Vec2 g = grad.values()[i];
    const double n = std::hypot(g.x, g.y);
    const double a = 1.0 - f_int.values()[i];
    const double diff = n - f_edge.values()[i];
    const double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
    const double m = std::max(a, n);
    const double d = std::abs(diff);
    // dL/dn collects the max() branch (when n wins) and the |n - e| factor.
    const double dn = ((a > n) ? 0.0 : d) + m * sign;
    if (a > n) out.d_int.values()[i] += -scale * d;
    out.d_edge.values()[i] = -scale * m * sign;
    if (n > 0.0) upstream.values()[i] = {scale * dn * g.x / n, scale * dn * g.y / n};
  }
  const Raster<double> via_grad = ff::spatial_gradient_adjoint(upstream);
  for (std::size_t i = 0; i < out.d_int.size(); ++i) out.d_int.values()[i] += via_grad.values()[i];
  return out;
}

void LossComponents::validate() const {
  for (double v : {l_int, l_edge, l_align, l_align90, l_smooth, l_int_align, l_edge_align, l_int_edge}) {
    if (!std::isfinite(v) || v < 0.0) throw DomainError("loss components must be finite and non-negative");
  }
}

double total_loss(const LossComponents& lc, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("total_loss: sigma must be positive");
  lc.validate();
  const double s2 = sigma * sigma;
  return lc.regularizer_sum() / (2.0 * s2) + lc.l_edge / sigma + lc.classification_sum() / s2 +
         std::log(sigma);
}

double optimal_sigma(const LossComponents& lc) {
  lc.validate();
  const double a = lc.regularizer_sum();
  const double b = lc.l_edge;
  const double c = lc.classification_sum();
  if (a == 0.0 && b == 0.0 && c == 0.0) {
    throw DomainError("optimal_sigma: all components are zero; total_loss has no finite minimizer");
  }
  // Stationarity: sigma^2 - b sigma - (a + 2c) = 0.
  return 0.5 * (b + std::sqrt(b * b + 4.0 * (a + 2.0 * c)));
}

ProbRaster distance_weight_map(const std::vector<Ring>& polygons, int height, int width, double w0,
                               double sigma) {
  if (!(sigma > 0.0)) throw DomainError("distance_weight_map: sigma must be positive");
  if (w0 < 0.0) throw DomainError("distance_weight_map: w0 must be non-negative");
  std::vector<BBox> boxes;
  boxes.reserve(polygons.size());
  for (const Ring& r : polygons) boxes.push_back(bbox(r));
  ProbRaster weights(height, width, 1.0);
  const double inf = std::numeric_limits<double>::infinity();
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const Point c{x + 0.5, y + 0.5};
      double d1 = inf, d2 = inf;
      for (std::size_t k = 0; k < polygons.size(); ++k) {
        const BBox& b = boxes[k];
        const double bx = std::max({b.min_x - c.x, 0.0, c.x - b.max_x});
        const double by = std::max({b.min_y - c.y, 0.0, c.y - b.max_y});
        if (std::hypot(bx, by) >= d2) continue;
        double d = 0.0;
        if (!contains(polygons[k], c)) {
          d = inf;
          const Ring& r = polygons[k];
          for (std::size_t i = 0; i < r.size(); ++i) {
            d = std::min(d, point_segment_distance(c, r[i], r[(i + 1) % r.size()]));
          }
        }
        if (d < d1) {
          d2 = d1;
          d1 = d;
        } else if (d < d2) {
          d2 = d;
        }
      }
      if (std::isfinite(d2)) {
        const double s = d1 + d2;
        weights(y, x) = 1.0 + w0 * std::exp(-(s * s) / (2.0 * sigma * sigma));
      }
    }
  }
  return weights;
}

LossComponents compute_components(const LossInputs& in, const LossParams& params) {
  LossComponents lc;
  lc.l_int = combined_seg_loss({in.f_int, in.y_int, in.int_weight}, params.seg_mix, params.clamp_eps,
                               params.smooth_eps);
  lc.l_edge = combined_seg_loss({in.f_edge, in.y_edge, nullptr}, params.seg_mix, params.clamp_eps,
                                params.smooth_eps);
  lc.l_align = align_loss(in.field, in.tang, in.y_edge);
  lc.l_align90 = align90_loss(in.field, in.tang, in.y_edge);
  lc.l_smooth = smooth_loss(in.field);
  lc.l_int_align = mask_align_loss(in.field, in.f_int, params.grad_eps);
  lc.l_edge_align = mask_align_loss(in.field, in.f_edge, params.grad_eps);
  lc.l_int_edge = int_edge_loss(in.f_int, in.f_edge);
  return lc;
}

// ---------------------------------------------------------------------------

GradCheckReport finite_diff_grad_check(const DifferentiableLoss& loss,
                                       std::span<const double> inputs, double step,
                                       std::uint64_t seed, std::size_t probes, double abs_floor) {
  if (!(step > 0.0 && step <= 1e-2)) throw DomainError("finite_diff_grad_check: step must lie in (0, 1e-2]");
  if (inputs.empty()) throw DomainError("finite_diff_grad_check: no inputs");

  const std::vector<double> analytic = loss.gradient(inputs);
  if (analytic.size() != inputs.size()) {
    throw DomainError("finite_diff_grad_check: gradient size does not match inputs for " + loss.name);
  }

  // Distinct coordinates by a partial Fisher-Yates shuffle.
  std::vector<std::size_t> order(inputs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Xoshiro256 rng(seed);
  const std::size_t count = std::min(probes, order.size());
  for (std::size_t i = 0; i < count; ++i) {
    const int j = rng.uniform_int(static_cast<int>(i), static_cast<int>(order.size() - 1));
    std::swap(order[i], order[static_cast<std::size_t>(j)]);
  }

  GradCheckReport report;
  std::vector<double> probe(inputs.begin(), inputs.end());
  BranchLog base_log;
  const double base = loss.value(probe, &base_log);
  if (!std::isfinite(base)) throw DomainError(loss.name + ": non-finite loss at the input point");

  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t idx = order[k];
    const double original = probe[idx];
    BranchLog plus_log, minus_log;
    probe[idx] = original + step;
    const double plus = loss.value(probe, &plus_log);
    probe[idx] = original - step;
    const double minus = loss.value(probe, &minus_log);
    probe[idx] = original;
    if (!std::isfinite(plus) || !std::isfinite(minus)) {
      throw DomainError(loss.name + ": non-finite loss at probe coordinate " + std::to_string(idx));
    }
    if (plus_log != base_log || minus_log != base_log) {
      report.skipped.push_back(idx);
      continue;
    }
    const double numeric = (plus - minus) / (2.0 * step);
    const double a = analytic[idx];
    const double denom = std::max({std::abs(a), std::abs(numeric), abs_floor});
    report.max_rel_error = std::max(report.max_rel_error, std::abs(a - numeric) / denom);
    ++report.checked;
  }
  return report;
}

std::vector<double> flatten_field(const FrameField& field) {
  const std::size_t n = field.k0.size();
  std::vector<double> flat(4 * n);
  for (std::size_t i = 0; i < n; ++i) {
    flat[i] = field.k0.values()[i].real();
    flat[n + i] = field.k0.values()[i].imag();
    flat[2 * n + i] = field.k1.values()[i].real();
    flat[3 * n + i] = field.k1.values()[i].imag();
  }
  return flat;
}

FrameField unflatten_field(std::span<const double> flat, int height, int width) {
  FrameField field(height, width);
  const std::size_t n = field.k0.size();
  if (flat.size() != 4 * n) throw DomainError("unflatten_field: size mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    field.k0.values()[i] = {flat[i], flat[n + i]};
    field.k1.values()[i] = {flat[2 * n + i], flat[3 * n + i]};
  }
  return field;
}

namespace {

ProbRaster plane_from(std::span<const double> flat, int height, int width, std::size_t offset = 0) {
  ProbRaster r(height, width);
  std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), r.size(), r.values().begin());
  return r;
}

std::vector<double> to_vector(const ProbRaster& r) { return {r.values().begin(), r.values().end()}; }

std::vector<double> field_grad_to_vector(const FieldGrad& g) {
  FrameField as_field;
  as_field.k0 = g.dk0;
  as_field.k1 = g.dk1;
  return flatten_field(as_field);
}

}  // namespace

DifferentiableLoss bce_target(const ProbRaster& gt, const ProbRaster* weight, double clamp_eps) {
  std::optional<ProbRaster> w;
  if (weight != nullptr) w = *weight;
  const int h = gt.height(), wd = gt.width();
  return {"bce_loss",
          [gt, w, clamp_eps, h, wd](std::span<const double> p, BranchLog* log) {
            const ProbRaster pred = plane_from(p, h, wd);
            return bce_loss({pred, gt, w ? &*w : nullptr}, clamp_eps, log);
          },
          [gt, w, clamp_eps, h, wd](std::span<const double> p) {
            const ProbRaster pred = plane_from(p, h, wd);
            return to_vector(bce_grad({pred, gt, w ? &*w : nullptr}, clamp_eps));
          }};
}

DifferentiableLoss dice_target(const ProbRaster& gt, double smooth_eps) {
  const int h = gt.height(), w = gt.width();
  return {"dice_loss",
          [gt, smooth_eps, h, w](std::span<const double> p, BranchLog*) {
            const ProbRaster pred = plane_from(p, h, w);
            return dice_loss({pred, gt}, smooth_eps);
          },
          [gt, smooth_eps, h, w](std::span<const double> p) {
            const ProbRaster pred = plane_from(p, h, w);
            return to_vector(dice_grad({pred, gt}, smooth_eps));
          }};
}

DifferentiableLoss combined_seg_target(const ProbRaster& gt, double c) {
  const int h = gt.height(), w = gt.width();
  return {"combined_seg_loss",
          [gt, c, h, w](std::span<const double> p, BranchLog* log) {
            const ProbRaster pred = plane_from(p, h, w);
            return combined_seg_loss({pred, gt}, c, kDefaultClampEps, kDefaultSmoothEps, log);
          },
          [gt, c, h, w](std::span<const double> p) {
            const ProbRaster pred = plane_from(p, h, w);
            return to_vector(combined_seg_grad({pred, gt}, c));
          }};
}

DifferentiableLoss align_target(const Raster<double>& tang, const ProbRaster& y_edge) {
  const int h = tang.height(), w = tang.width();
  return {"align_loss",
          [tang, y_edge, h, w](std::span<const double> p, BranchLog*) {
            return align_loss(unflatten_field(p, h, w), tang, y_edge);
          },
          [tang, y_edge, h, w](std::span<const double> p) {
            return field_grad_to_vector(align_grad(unflatten_field(p, h, w), tang, y_edge));
          }};
}

DifferentiableLoss align90_target(const Raster<double>& tang, const ProbRaster& y_edge) {
  const int h = tang.height(), w = tang.width();
  return {"align90_loss",
          [tang, y_edge, h, w](std::span<const double> p, BranchLog*) {
            return align90_loss(unflatten_field(p, h, w), tang, y_edge);
          },
          [tang, y_edge, h, w](std::span<const double> p) {
            return field_grad_to_vector(align90_grad(unflatten_field(p, h, w), tang, y_edge));
          }};
}

DifferentiableLoss smooth_target(int height, int width) {
  return {"smooth_loss",
          [height, width](std::span<const double> p, BranchLog*) {
            return smooth_loss(unflatten_field(p, height, width));
          },
          [height, width](std::span<const double> p) {
            return field_grad_to_vector(smooth_grad(unflatten_field(p, height, width)));
          }};
}

DifferentiableLoss mask_align_field_target(const ProbRaster& mask, double grad_eps) {
  const int h = mask.height(), w = mask.width();
  return {"mask_align_loss[field]",
          [mask, grad_eps, h, w](std::span<const double> p, BranchLog* log) {
            return mask_align_loss(unflatten_field(p, h, w), mask, grad_eps, log);
          },
          [mask, grad_eps, h, w](std::span<const double> p) {
            return field_grad_to_vector(mask_align_field_grad(unflatten_field(p, h, w), mask, grad_eps));
          }};
}

DifferentiableLoss mask_align_mask_target(const FrameField& field, double grad_eps) {
  const int h = field.height(), w = field.width();
  return {"mask_align_loss[mask]",
          [field, grad_eps, h, w](std::span<const double> p, BranchLog* log) {
            return mask_align_loss(field, plane_from(p, h, w), grad_eps, log);
          },
          [field, grad_eps, h, w](std::span<const double> p) {
            return to_vector(mask_align_mask_grad(field, plane_from(p, h, w), grad_eps));
          }};
}

DifferentiableLoss int_edge_target(int height, int width) {
  const std::size_t n = static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  return {"int_edge_loss",
          [height, width, n](std::span<const double> p, BranchLog* log) {
            return int_edge_loss(plane_from(p, height, width), plane_from(p, height, width, n), log);
          },
          [height, width, n](std::span<const double> p) {
            const IntEdgeGrad g =
                int_edge_grad(plane_from(p, height, width), plane_from(p, height, width, n));
            std::vector<double> out = to_vector(g.d_int);
            out.insert(out.end(), g.d_edge.values().begin(), g.d_edge.values().end());
            return out;
          }};
}

}  // namespace densepoly::losses
