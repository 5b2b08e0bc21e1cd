#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace densepoly {

/// Position in pixel units: x along columns, y along rows.
struct Point {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point&) const = default;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(Point a, double s) { return {a.x * s, a.y * s}; }

double dot(Point a, Point b);
double cross(Point a, Point b);
double norm(Point a);
double distance(Point a, Point b);

/// Open ring: the closing edge back to front() is implicit.
using Ring = std::vector<Point>;

struct BBox {
  double min_x, min_y, max_x, max_y;

  bool overlaps(const BBox& o, double pad = 0.0) const {
    return min_x <= o.max_x + pad && o.min_x <= max_x + pad && min_y <= o.max_y + pad &&
           o.min_y <= max_y + pad;
  }
};

BBox bbox(const Ring& ring);

/// Shoelace area; positive for counter-clockwise rings in (x, y).
double signed_area(const Ring& ring);
double area(const Ring& ring);
double perimeter(const Ring& ring);

/// Returns a copy oriented counter-clockwise (positive signed area).
Ring oriented_ccw(Ring ring);

/// Crossing-number test. Points exactly on an edge are assigned so that two
/// rings sharing that edge never both claim the point.
bool contains(const Ring& ring, Point p);

double point_segment_distance(Point p, Point a, Point b);
double segment_segment_distance(Point a0, Point a1, Point b0, Point b1);

/// Minimum distance between the boundaries of two rings; zero when they touch
/// or cross.
double ring_distance(const Ring& a, const Ring& b);

enum class SegmentRelation { kDisjoint, kTouching, kCrossing, kOverlapping };

/// Classifies two closed segments. kTouching: they meet only at endpoints of
/// at least one segment; kCrossing: interiors intersect at a single point;
/// kOverlapping: collinear with a shared sub-segment of positive length.
SegmentRelation classify_segments(Point a0, Point a1, Point b0, Point b1);

/// Finds a pair of non-adjacent ring edges that intersect, if any.
std::optional<std::pair<std::size_t, std::size_t>> find_self_intersection(const Ring& ring);

/// At least three distinct vertices, positive area, and no self-intersection.
bool is_valid_simple_ring(const Ring& ring);

/// Drops consecutive duplicates (including last == first).
Ring remove_duplicate_vertices(Ring ring, double eps = 0.0);

}  // namespace densepoly
