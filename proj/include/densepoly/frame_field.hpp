#pragma once

#include <array>

#include "densepoly/common.hpp"
#include "densepoly/geometry.hpp"
#include "densepoly/raster.hpp"

namespace densepoly::ff {

/// Unsigned direction; theta and theta + pi are the same direction. The
/// stored angle is always canonical, in [0, pi).
class Direction {
 public:
  Direction() = default;
  explicit Direction(double radians) : angle_(canonical_angle(radians)) {}

  static Direction from_vector(double dx, double dy);

  double angle() const noexcept { return angle_; }
  Complex unit() const { return std::polar(1.0, angle_); }

  /// Angle reduced modulo pi into [0, pi).
  static double canonical_angle(double radians);

 private:
  double angle_ = 0.0;
};

/// Smallest angle between two unsigned directions, in [0, pi/2].
double angular_distance(Direction a, Direction b);

/// Coefficients of f(z) = z^4 + k1 z^2 + k0 = (z^2 - i^2)(z^2 - j^2).
struct FrameCoeffs {
  Complex k0{};
  Complex k1{};

  bool operator==(const FrameCoeffs&) const = default;
};

inline constexpr double kDefaultDegenerateEps = 1e-6;

/// z^4 + k1 z^2 + k0 for unit z. Throws DomainError when |z| is not 1 within 1e-9.
Complex eval_field_poly(Complex z, const FrameCoeffs& c);

FrameCoeffs coeffs_from_directions(Direction i_dir, Direction j_dir);

struct DirectionPair {
  std::array<Direction, 2> dirs;  // sorted by angle
  bool degenerate = false;
};

/// Recovers the unordered direction pair from the roots u = z^2 of
/// u^2 + k1 u + k0. Flags frames whose discriminant is below eps_degenerate.
DirectionPair directions_from_coeffs(const FrameCoeffs& c,
                                     double eps_degenerate = kDefaultDegenerateEps);

/// |f(e^{i theta})|^2; zero exactly on the frame's directions.
double alignment_energy(Direction d, const FrameCoeffs& c);

/// Same as alignment_energy for a raw angle, without the unit check.
double alignment_energy_at(double theta, const FrameCoeffs& c);

/// Per-pixel complex coefficient planes.
struct FrameField {
  Raster<Complex> k0;
  Raster<Complex> k1;

  FrameField() = default;
  FrameField(int height, int width) : k0(height, width), k1(height, width) {}

  int height() const noexcept { return k0.height(); }
  int width() const noexcept { return k0.width(); }

  FrameCoeffs at(int row, int col) const { return {k0(row, col), k1(row, col)}; }
  void set(int row, int col, const FrameCoeffs& c) {
    k0(row, col) = c.k0;
    k1(row, col) = c.k1;
  }

  /// Bilinear interpolation of both planes at a position in pixel units.
  FrameCoeffs sample(Point p) const {
    return {sample_bilinear(k0, p.x, p.y), sample_bilinear(k1, p.x, p.y)};
  }

  /// Throws DomainError if the planes disagree in shape or hold non-finite values.
  void validate() const;
};

/// Central differences in the interior, one-sided at the borders.
/// x is the column direction, y the row direction.
Raster<Vec2> spatial_gradient(const Raster<double>& r);

/// Transpose of spatial_gradient: maps dL/d(gradient) to dL/d(raster).
Raster<double> spatial_gradient_adjoint(const Raster<Vec2>& upstream);

}  // namespace densepoly::ff
