#include "parkplan/geometry.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

namespace parkplan {

HalfPlane half_plane_through(const Vec2& p0, const Vec2& p1, const Vec2& inside) {
  Vec2 d = p1 - p0;
  const double len = d.norm();
  if (len < 1e-12) throw std::invalid_argument("half_plane_through: degenerate edge");
  Vec2 n{d.y / len, -d.x / len};  // one of the two unit normals
  double c = -(n.x * p0.x + n.y * p0.y);
  if (n.x * inside.x + n.y * inside.y + c > 0.0) {
    n = -n;
    c = -c;
  }
  return {n.x, n.y, c};
}

bool ConvexPolygon::contains(const Vec2& p, double tol) const {
  const size_t n = vertices.size();
  if (n < 3) return false;
  for (size_t i = 0; i < n; ++i) {
    const Vec2& a = vertices[i];
    const Vec2& b = vertices[(i + 1) % n];
    // CCW order: interior is to the left of each edge.
    if ((b - a).cross(p - a) < -tol) return false;
  }
  return true;
}

namespace {

// Projects polygon vertices onto axis; returns [min, max].
std::pair<double, double> project(const ConvexPolygon& poly, const Vec2& axis) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const Vec2& v : poly.vertices) {
    const double d = v.dot(axis);
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  return {lo, hi};
}

// Smallest overlap across all edge normals of `a`; negative means separated.
double min_overlap_for_axes(const ConvexPolygon& a, const ConvexPolygon& b) {
  double best = std::numeric_limits<double>::infinity();
  const size_t n = a.vertices.size();
  for (size_t i = 0; i < n; ++i) {
    Vec2 e = a.vertices[(i + 1) % n] - a.vertices[i];
    const double len = e.norm();
    if (len < 1e-15) continue;
    const Vec2 axis{e.y / len, -e.x / len};
    auto [alo, ahi] = project(a, axis);
    auto [blo, bhi] = project(b, axis);
    const double overlap = std::min(ahi, bhi) - std::max(alo, blo);
    best = std::min(best, overlap);
    if (best < 0.0) return best;
  }
  return best;
}

}  // namespace

bool polygons_intersect(const ConvexPolygon& a, const ConvexPolygon& b) {
  if (a.vertices.size() < 3 || b.vertices.size() < 3) return false;
  // Closed polygons: zero-gap contact counts as intersection.
  if (min_overlap_for_axes(a, b) < 0.0) return false;
  if (min_overlap_for_axes(b, a) < 0.0) return false;
  return true;
}

double penetration_depth(const ConvexPolygon& a, const ConvexPolygon& b) {
  if (a.vertices.size() < 3 || b.vertices.size() < 3) return 0.0;
  const double da = min_overlap_for_axes(a, b);
  if (da < 0.0) return 0.0;
  const double db = min_overlap_for_axes(b, a);
  if (db < 0.0) return 0.0;
  return std::min(da, db);
}

bool ConvexRegion::contains(const Vec2& p, double tol) const {
  if (edges.empty()) return false;
  for (const HalfPlane& e : edges) {
    if (e.signed_distance(p) > tol) return false;
  }
  return true;
}

ConvexRegion region_from_polygon(const std::vector<Vec2>& raw_vertices, std::string label) {
  // Collapse consecutive near-identical vertices so every edge has a usable normal.
  std::vector<Vec2> ccw_vertices;
  for (const Vec2& v : raw_vertices) {
    if (ccw_vertices.empty() || (v - ccw_vertices.back()).norm() > 1e-9) {
      ccw_vertices.push_back(v);
    }
  }
  while (ccw_vertices.size() > 1 &&
         (ccw_vertices.front() - ccw_vertices.back()).norm() <= 1e-9) {
    ccw_vertices.pop_back();
  }
  if (ccw_vertices.size() < 3) {
    throw std::invalid_argument("region_from_polygon: need at least 3 vertices");
  }
  double area2 = 0.0;
  const size_t n = ccw_vertices.size();
  for (size_t i = 0; i < n; ++i) {
    area2 += ccw_vertices[i].cross(ccw_vertices[(i + 1) % n]);
  }
  if (area2 <= 1e-12) {
    throw std::invalid_argument("region_from_polygon: vertices must be CCW and non-degenerate");
  }
  Vec2 centroid{0.0, 0.0};
  for (const Vec2& v : ccw_vertices) centroid = centroid + v;
  centroid = centroid * (1.0 / static_cast<double>(n));

  ConvexRegion region;
  region.label = std::move(label);
  region.polygon.vertices = ccw_vertices;
  for (size_t i = 0; i < n; ++i) {
    region.edges.push_back(half_plane_through(ccw_vertices[i], ccw_vertices[(i + 1) % n], centroid));
  }
  return region;
}

ConvexRegion region_from_rect(double x0, double y0, double x1, double y1, std::string label) {
  if (!(x1 > x0) || !(y1 > y0)) throw std::invalid_argument("region_from_rect: empty rectangle");
  return region_from_polygon({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}, std::move(label));
}

ConvexPolygon clip_polygon(const ConvexPolygon& poly, const HalfPlane& hp) {
  ConvexPolygon out;
  const size_t n = poly.vertices.size();
  if (n == 0) return out;
  for (size_t i = 0; i < n; ++i) {
    const Vec2& cur = poly.vertices[i];
    const Vec2& nxt = poly.vertices[(i + 1) % n];
    const double dc = hp.signed_distance(cur);
    const double dn = hp.signed_distance(nxt);
    if (dc <= 0.0) out.vertices.push_back(cur);
    if ((dc < 0.0 && dn > 0.0) || (dc > 0.0 && dn < 0.0)) {
      const double t = dc / (dc - dn);
      out.vertices.push_back(cur + (nxt - cur) * t);
    }
  }
  return out;
}

ConvexRegion ConvexRegion::inflated(double margin) const {
  if (margin == 0.0) return *this;
  // Grow each edge outward, then rebuild vertices by intersecting neighbours.
  ConvexRegion grown;
  grown.label = label;
  grown.edges = edges;
  for (HalfPlane& e : grown.edges) e.c -= margin;
  const size_t n = grown.edges.size();
  for (size_t i = 0; i < n; ++i) {
    const HalfPlane& e0 = grown.edges[i];
    const HalfPlane& e1 = grown.edges[(i + 1) % n];
    const double det = e0.a * e1.b - e1.a * e0.b;
    if (std::abs(det) < 1e-12) continue;  // parallel neighbours never happen for our rects
    grown.polygon.vertices.push_back(
        {(-e0.c * e1.b + e1.c * e0.b) / det, (-e0.a * e1.c + e1.a * e0.c) / det});
  }
  return grown;
}

}  // namespace parkplan
