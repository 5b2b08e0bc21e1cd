#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "densepoly/common.hpp"

namespace densepoly {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Dense row-major grid with a top-left origin. Pixel (row, col) covers the
/// unit square [col, col+1) x [row, row+1); its center is (col+0.5, row+0.5).
template <typename T>
class Raster {
 public:
  Raster() = default;
  Raster(int height, int width, T fill = T{})
      : height_(height), width_(width), data_(checked_size(height, width), fill) {}

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(int row, int col) {
    assert(in_bounds(row, col));
    return data_[index(row, col)];
  }
  const T& operator()(int row, int col) const {
    assert(in_bounds(row, col));
    return data_[index(row, col)];
  }

  bool in_bounds(int row, int col) const noexcept {
    return row >= 0 && row < height_ && col >= 0 && col < width_;
  }

  std::size_t index(int row, int col) const noexcept {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  template <typename U>
  bool same_shape(const Raster<U>& other) const noexcept {
    return height_ == other.height() && width_ == other.width();
  }

  bool operator==(const Raster&) const = default;

 private:
  static std::size_t checked_size(int height, int width) {
    if (height < 0 || width < 0) throw DomainError("raster dimensions must be non-negative");
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<T> data_;
};

using ProbRaster = Raster<double>;

template <typename A, typename B>
void require_same_shape(const Raster<A>& a, const Raster<B>& b, const char* what) {
  if (!a.same_shape(b)) {
    throw DomainError(std::string(what) + ": raster dimensions differ (" +
                      std::to_string(a.height()) + "x" + std::to_string(a.width()) + " vs " +
                      std::to_string(b.height()) + "x" + std::to_string(b.width()) + ")");
  }
}

/// Bilinear sample at a continuous position in pixel units. Samples are
/// anchored at pixel centers; positions outside the center lattice clamp.
template <typename T>
T sample_bilinear(const Raster<T>& r, double px, double py) {
  const double fx = std::clamp(px - 0.5, 0.0, static_cast<double>(r.width() - 1));
  const double fy = std::clamp(py - 0.5, 0.0, static_cast<double>(r.height() - 1));
  const int x0 = std::min(static_cast<int>(fx), std::max(r.width() - 2, 0));
  const int y0 = std::min(static_cast<int>(fy), std::max(r.height() - 2, 0));
  const int x1 = std::min(x0 + 1, r.width() - 1);
  const int y1 = std::min(y0 + 1, r.height() - 1);
  const double tx = fx - x0;
  const double ty = fy - y0;
  const T top = r(y0, x0) * (1.0 - tx) + r(y0, x1) * tx;
  const T bottom = r(y1, x0) * (1.0 - tx) + r(y1, x1) * tx;
  return top * (1.0 - ty) + bottom * ty;
}

/// Value and spatial derivative of the bilinear interpolant. The derivative
/// is zero along an axis where the position is clamped.
template <typename T>
struct BilinearSample {
  T value;
  T ddx;
  T ddy;
};

template <typename T>
BilinearSample<T> sample_bilinear_with_gradient(const Raster<T>& r, double px, double py) {
  const double fx_raw = px - 0.5;
  const double fy_raw = py - 0.5;
  const double max_x = static_cast<double>(r.width() - 1);
  const double max_y = static_cast<double>(r.height() - 1);
  const bool clamp_x = fx_raw < 0.0 || fx_raw > max_x || r.width() < 2;
  const bool clamp_y = fy_raw < 0.0 || fy_raw > max_y || r.height() < 2;
  const double fx = std::clamp(fx_raw, 0.0, max_x);
  const double fy = std::clamp(fy_raw, 0.0, max_y);
  const int x0 = std::min(static_cast<int>(fx), std::max(r.width() - 2, 0));
  const int y0 = std::min(static_cast<int>(fy), std::max(r.height() - 2, 0));
  const int x1 = std::min(x0 + 1, r.width() - 1);
  const int y1 = std::min(y0 + 1, r.height() - 1);
  const double tx = fx - x0;
  const double ty = fy - y0;
  const T v00 = r(y0, x0), v01 = r(y0, x1), v10 = r(y1, x0), v11 = r(y1, x1);
  const T top = v00 * (1.0 - tx) + v01 * tx;
  const T bottom = v10 * (1.0 - tx) + v11 * tx;
  BilinearSample<T> s{top * (1.0 - ty) + bottom * ty, T{}, T{}};
  if (!clamp_x) s.ddx = (v01 - v00) * (1.0 - ty) + (v11 - v10) * ty;
  if (!clamp_y) s.ddy = bottom - top;
  return s;
}

}  // namespace densepoly
