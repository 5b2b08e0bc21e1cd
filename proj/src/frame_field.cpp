#include "densepoly/frame_field.hpp"

#include <algorithm>
#include <cmath>

namespace densepoly::ff {

double Direction::canonical_angle(double radians) {
  double a = std::fmod(radians, kPi);
  if (a < 0.0) a += kPi;
  if (a >= kPi) a = 0.0;
  return a;
}

Direction Direction::from_vector(double dx, double dy) { return Direction(std::atan2(dy, dx)); }

double angular_distance(Direction a, Direction b) {
  const double d = std::abs(a.angle() - b.angle());
  return std::min(d, kPi - d);
}

Complex eval_field_poly(Complex z, const FrameCoeffs& c) {
  if (std::abs(std::abs(z) - 1.0) > 1e-9) {
    throw DomainError("eval_field_poly: z must lie on the unit circle");
  }
  const Complex z2 = z * z;
  return z2 * z2 + c.k1 * z2 + c.k0;
}

FrameCoeffs coeffs_from_directions(Direction i_dir, Direction j_dir) {
  const Complex i2 = std::polar(1.0, 2.0 * i_dir.angle());
  const Complex j2 = std::polar(1.0, 2.0 * j_dir.angle());
  return {i2 * j2, -(i2 + j2)};
}

DirectionPair directions_from_coeffs(const FrameCoeffs& c, double eps_degenerate) {
  const Complex disc = c.k1 * c.k1 - 4.0 * c.k0;
  const Complex root = std::sqrt(disc);
  const Complex u1 = (-c.k1 + root) * 0.5;
  const Complex u2 = (-c.k1 - root) * 0.5;
  // z = sqrt(u); its argument is half of u's, and the sign of z is irrelevant.
  Direction d1(0.5 * std::arg(u1));
  Direction d2(0.5 * std::arg(u2));
  if (d2.angle() < d1.angle()) std::swap(d1, d2);
  return {{d1, d2}, std::abs(disc) < eps_degenerate};
}

double alignment_energy_at(double theta, const FrameCoeffs& c) {
  const Complex u = std::polar(1.0, 2.0 * theta);
  return std::norm(u * u + c.k1 * u + c.k0);
}

double alignment_energy(Direction d, const FrameCoeffs& c) {
  return std::norm(eval_field_poly(d.unit(), c));
}

void FrameField::validate() const {
  require_same_shape(k0, k1, "frame field");
  for (const Complex& v : k0.values()) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw DomainError("frame field: non-finite k0 coefficient");
    }
  }
  for (const Complex& v : k1.values()) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw DomainError("frame field: non-finite k1 coefficient");
    }
  }
}

Raster<Vec2> spatial_gradient(const Raster<double>& r) {
  const int h = r.height();
  const int w = r.width();
  if (h < 2 || w < 2) throw DomainError("spatial_gradient: raster must be at least 2x2");
  Raster<Vec2> g(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      Vec2& out = g(y, x);
      if (x == 0) {
        out.x = r(y, 1) - r(y, 0);
      } else if (x == w - 1) {
        out.x = r(y, w - 1) - r(y, w - 2);
      } else {
        out.x = 0.5 * (r(y, x + 1) - r(y, x - 1));
      }
      if (y == 0) {
        out.y = r(1, x) - r(0, x);
      } else if (y == h - 1) {
        out.y = r(h - 1, x) - r(h - 2, x);
      } else {
        out.y = 0.5 * (r(y + 1, x) - r(y - 1, x));
      }
    }
  }
  return g;
}

Raster<double> spatial_gradient_adjoint(const Raster<Vec2>& upstream) {
  const int h = upstream.height();
  const int w = upstream.width();
  if (h < 2 || w < 2) throw DomainError("spatial_gradient_adjoint: raster must be at least 2x2");
  Raster<double> out(h, w, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Vec2 g = upstream(y, x);
      if (x == 0) {
        out(y, 1) += g.x;
        out(y, 0) -= g.x;
      } else if (x == w - 1) {
        out(y, w - 1) += g.x;
        out(y, w - 2) -= g.x;
      } else {
        out(y, x + 1) += 0.5 * g.x;
        out(y, x - 1) -= 0.5 * g.x;
      }
      if (y == 0) {
        out(1, x) += g.y;
        out(0, x) -= g.y;
      } else if (y == h - 1) {
        out(h - 1, x) += g.y;
        out(h - 2, x) -= g.y;
      } else {
        out(y + 1, x) += 0.5 * g.y;
        out(y - 1, x) -= 0.5 * g.y;
      }
    }
  }
  return out;
}

}  // namespace densepoly::ff
