#include "densepoly/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace densepoly {

double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
double norm(Point a) { return std::hypot(a.x, a.y); }
double distance(Point a, Point b) { return norm(a - b); }

BBox bbox(const Ring& ring) {
  BBox b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
         -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const Point& p : ring) {
    b.min_x = std::min(b.min_x, p.x);
    b.min_y = std::min(b.min_y, p.y);
    b.max_x = std::max(b.max_x, p.x);
    b.max_y = std::max(b.max_y, p.y);
  }
  return b;
}

double signed_area(const Ring& ring) {
  const std::size_t n = ring.size();
  if (n < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = ring[i];
    const Point& b = ring[(i + 1) % n];
    twice += a.x * b.y - b.x * a.y;
  }
  return 0.5 * twice;
}

double area(const Ring& ring) { return std::abs(signed_area(ring)); }

double perimeter(const Ring& ring) {
  double total = 0.0;
  for (std::size_t i = 0; i < ring.size(); ++i) total += distance(ring[i], ring[(i + 1) % ring.size()]);
  return total;
}

Ring oriented_ccw(Ring ring) {
  if (signed_area(ring) < 0.0) std::reverse(ring.begin(), ring.end());
  return ring;
}

bool contains(const Ring& ring, Point p) {
  bool inside = false;
  const std::size_t n = ring.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point& a = ring[i];
    const Point& b = ring[j];
    // Half-open in y: an edge counts when p.y is in [min y, max y).
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_at = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_at) inside = !inside;
    }
  }
  return inside;
}

double point_segment_distance(Point p, Point a, Point b) {
  const Point ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return distance(p, a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(p, a + ab * t);
}

namespace {

int orientation_sign(Point a, Point b, Point c) {
  const double v = cross(b - a, c - a);
  if (v > 0.0) return 1;
  if (v < 0.0) return -1;
  return 0;
}

bool on_segment(Point a, Point b, Point p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

}  // namespace

SegmentRelation classify_segments(Point a0, Point a1, Point b0, Point b1) {
  const int o1 = orientation_sign(a0, a1, b0);
  const int o2 = orientation_sign(a0, a1, b1);
  const int o3 = orientation_sign(b0, b1, a0);
  const int o4 = orientation_sign(b0, b1, a1);

  if (o1 == 0 && o2 == 0) {
    // Collinear: project on the dominant axis and measure the overlap.
    const bool use_x = std::abs(a1.x - a0.x) + std::abs(b1.x - b0.x) >=
                       std::abs(a1.y - a0.y) + std::abs(b1.y - b0.y);
    auto coord = [use_x](Point p) { return use_x ? p.x : p.y; };
    const double lo = std::max(std::min(coord(a0), coord(a1)), std::min(coord(b0), coord(b1)));
    const double hi = std::min(std::max(coord(a0), coord(a1)), std::max(coord(b0), coord(b1)));
    if (hi > lo) return SegmentRelation::kOverlapping;
    if (hi == lo) return SegmentRelation::kTouching;
    return SegmentRelation::kDisjoint;
  }

  if (o1 != o2 && o3 != o4) {
    if (o1 == 0 || o2 == 0 || o3 == 0 || o4 == 0) return SegmentRelation::kTouching;
    return SegmentRelation::kCrossing;
  }
  if ((o1 == 0 && on_segment(a0, a1, b0)) || (o2 == 0 && on_segment(a0, a1, b1)) ||
      (o3 == 0 && on_segment(b0, b1, a0)) || (o4 == 0 && on_segment(b0, b1, a1))) {
    return SegmentRelation::kTouching;
  }
  return SegmentRelation::kDisjoint;
}

double segment_segment_distance(Point a0, Point a1, Point b0, Point b1) {
  if (classify_segments(a0, a1, b0, b1) != SegmentRelation::kDisjoint) return 0.0;
  return std::min({point_segment_distance(a0, b0, b1), point_segment_distance(a1, b0, b1),
                   point_segment_distance(b0, a0, a1), point_segment_distance(b1, a0, a1)});
}

double ring_distance(const Ring& a, const Ring& b) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Point a0 = a[i], a1 = a[(i + 1) % a.size()];
    for (std::size_t j = 0; j < b.size(); ++j) {
      best = std::min(best, segment_segment_distance(a0, a1, b[j], b[(j + 1) % b.size()]));
      if (best == 0.0) return 0.0;
    }
  }
  return best;
}

std::optional<std::pair<std::size_t, std::size_t>> find_self_intersection(const Ring& ring) {
  const std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point a0 = ring[i], a1 = ring[(i + 1) % n];
    for (std::size_t j = i + 1; j < n; ++j) {
      const Point b0 = ring[j], b1 = ring[(j + 1) % n];
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      const SegmentRelation rel = classify_segments(a0, a1, b0, b1);
      if (rel == SegmentRelation::kDisjoint) continue;
      if (adjacent) {
        // Edges sharing a vertex only conflict when they fold back onto each other.
        if (rel == SegmentRelation::kOverlapping) return std::make_pair(i, j);
        continue;
      }
      return std::make_pair(i, j);
    }
  }
  return std::nullopt;
}

bool is_valid_simple_ring(const Ring& ring) {
  if (ring.size() < 3) return false;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    if (ring[i] == ring[(i + 1) % ring.size()]) return false;
  }
  if (area(ring) <= 0.0) return false;
  return !find_self_intersection(ring).has_value();
}

Ring remove_duplicate_vertices(Ring ring, double eps) {
  Ring out;
  out.reserve(ring.size());
  for (const Point& p : ring) {
    if (!out.empty() && distance(out.back(), p) <= eps) continue;
    out.push_back(p);
  }
  while (out.size() > 1 && distance(out.front(), out.back()) <= eps) out.pop_back();
  return out;
}

}  // namespace densepoly
