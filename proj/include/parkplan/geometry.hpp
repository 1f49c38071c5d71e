#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace parkplan {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator-() const { return {-x, -y}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  Vec2 rotated(double ang) const {
    const double c = std::cos(ang), s = std::sin(ang);
    return {c * x - s * y, s * x + c * y};
  }
  // Perpendicular, 90 degrees counterclockwise.
  Vec2 perp() const { return {-y, x}; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

// Normalizes an angle into (-pi, pi].
inline double wrap_angle(double a) {
  const double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

// Planar pose; theta is kept in (-pi, pi].
struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Pose2D() = default;
  Pose2D(double px, double py, double ptheta) : x(px), y(py), theta(wrap_angle(ptheta)) {}
  Vec2 position() const { return {x, y}; }
  Vec2 heading_dir() const { return {std::cos(theta), std::sin(theta)}; }
};

// Half-plane a*x + b*y + c <= 0 with (a, b) of unit norm.
struct HalfPlane {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  double signed_distance(const Vec2& p) const { return a * p.x + b * p.y + c; }
};

// Builds the half-plane containing `inside` whose boundary passes through p0 -> p1.
HalfPlane half_plane_through(const Vec2& p0, const Vec2& p1, const Vec2& inside);

// Closed convex polygon given by its vertices in counterclockwise order.
// Intersection tests treat the boundary as part of the polygon.
struct ConvexPolygon {
  std::vector<Vec2> vertices;

  bool contains(const Vec2& p, double tol = 0.0) const;
};

// True when the two closed convex polygons share at least one point
// (touching boundaries count as overlap). Exact separating-axis test.
bool polygons_intersect(const ConvexPolygon& a, const ConvexPolygon& b);

// Depth by which polygon b penetrates polygon a: the smallest translation
// distance that would separate them. Zero when they do not overlap.
double penetration_depth(const ConvexPolygon& a, const ConvexPolygon& b);

// Convex infeasible region stored both as an edge list (for optimizer rows)
// and as its vertex polygon (for exact tests). Bounded and non-empty.
struct ConvexRegion {
  std::vector<HalfPlane> edges;  // unit-norm outward half-planes, region = all <= 0
  ConvexPolygon polygon;         // matching vertex representation, CCW
  std::string label;

  bool contains(const Vec2& p, double tol = 0.0) const;
  // Region grown outward by `margin` along every edge (vertices recomputed).
  ConvexRegion inflated(double margin) const;
};

// Builds a region from CCW vertices of a convex polygon.
ConvexRegion region_from_polygon(const std::vector<Vec2>& ccw_vertices, std::string label);

// Axis-aligned rectangle [x0,x1] x [y0,y1] as a region.
ConvexRegion region_from_rect(double x0, double y0, double x1, double y1, std::string label);

// Intersects a convex polygon with a half-plane; may return an empty polygon.
ConvexPolygon clip_polygon(const ConvexPolygon& poly, const HalfPlane& hp);

}  // namespace parkplan
