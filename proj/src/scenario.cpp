#include "parkplan/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace parkplan {

namespace {

constexpr double kWorkspaceHalfWidth = 18.0;  // x extent of obstacle strips
constexpr double kBoundaryStripDepth = 2.0;   // thickness of the far-road strip

std::string format_number(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);  // shortest exact form
  return std::string(buf, res.ptr);
}

}  // namespace

void VehicleParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw std::invalid_argument(std::string("vehicle: ") + name + " must be > 0");
  };
  positive(wheelbase, "wheelbase");
  positive(rear_overhang, "rear_overhang");
  positive(front_length, "front_length");
  positive(width, "width");
  positive(v_max, "v_max");
  positive(a_max, "a_max");
  positive(delta_max, "delta_max");
  positive(tau_a, "tau_a");
  positive(tau_delta, "tau_delta");
  if (!(v_min < 0.0)) throw std::invalid_argument("vehicle: v_min must be < 0");
  if (!(a_min < 0.0)) throw std::invalid_argument("vehicle: a_min must be < 0");
  if (!(delta_max < std::numbers::pi / 2)) {
    throw std::invalid_argument("vehicle: delta_max must be < pi/2");
  }
  if (!(front_length > wheelbase)) {
    throw std::invalid_argument("vehicle: front_length must cover the wheelbase");
  }
}

const char* to_string(SlotKind kind) {
  switch (kind) {
    case SlotKind::parallel: return "parallel";
    case SlotKind::reverse: return "reverse";
    case SlotKind::angle: return "angle";
  }
  return "unknown";
}

std::optional<SlotKind> slot_kind_from_string(const std::string& name) {
  if (name == "parallel") return SlotKind::parallel;
  if (name == "reverse") return SlotKind::reverse;
  if (name == "angle") return SlotKind::angle;
  return std::nullopt;
}

ConvexPolygon footprint(const Pose2D& pose, const VehicleParams& vehicle) {
  const Vec2 fwd = pose.heading_dir();
  const Vec2 left = fwd.perp();
  const Vec2 p = pose.position();
  const double w = vehicle.width / 2.0;
  ConvexPolygon poly;
  poly.vertices = {
      p + fwd * vehicle.front_length - left * w,
      p + fwd * vehicle.front_length + left * w,
      p - fwd * vehicle.rear_overhang + left * w,
      p - fwd * vehicle.rear_overhang - left * w,
  };
  return poly;
}

std::array<Vec2, 6> feature_point_offsets(const VehicleParams& vehicle) {
  const double w = vehicle.width / 2.0;
  const double mid = (vehicle.front_length - vehicle.rear_overhang) / 2.0;
  return {{
      {vehicle.front_length, -w},   // front-right
      {vehicle.front_length, w},    // front-left
      {-vehicle.rear_overhang, w},  // rear-left
      {-vehicle.rear_overhang, -w}, // rear-right
      {mid, -w},                    // mid-right
      {mid, w},                     // mid-left
  }};
}

std::array<Vec2, 6> feature_points(const Pose2D& pose, const VehicleParams& vehicle) {
  const Vec2 fwd = pose.heading_dir();
  const Vec2 left = fwd.perp();
  const Vec2 p = pose.position();
  std::array<Vec2, 6> pts;
  const auto offsets = feature_point_offsets(vehicle);
  for (size_t i = 0; i < pts.size(); ++i) {
    pts[i] = p + fwd * offsets[i].x + left * offsets[i].y;
  }
  return pts;
}

bool collision_free(const ConvexPolygon& body, const std::vector<ConvexRegion>& regions) {
  for (const ConvexRegion& region : regions) {
    if (polygons_intersect(body, region.polygon)) return false;
  }
  return true;
}

bool collision_free(const Pose2D& pose, const VehicleParams& vehicle,
                    const std::vector<ConvexRegion>& regions) {
  return collision_free(footprint(pose, vehicle), regions);
}

double default_y1(double rw, double y0, const VehicleParams& vehicle) {
  const double half_width = vehicle.width / 2.0;
  const double y1 = rw - y0 - half_width;
  return std::clamp(y1, half_width, std::max(half_width, rw - half_width));
}

namespace {

void append_flank_and_boundary(std::vector<ConvexRegion>& regions, double slot_half_x,
                               double rw, double depth) {
  regions.push_back(region_from_rect(-kWorkspaceHalfWidth, rw, -slot_half_x, rw + depth,
                                     "flank_rear"));
  regions.push_back(region_from_rect(slot_half_x, rw, kWorkspaceHalfWidth, rw + depth,
                                     "flank_front"));
  regions.push_back(region_from_rect(-kWorkspaceHalfWidth, -kBoundaryStripDepth,
                                     kWorkspaceHalfWidth, 0.0, "road_boundary"));
}

ConvexPolygon rect_polygon(const Vec2& origin, const Vec2& u, const Vec2& w, double along,
                           double half_across) {
  // CCW for u x w > 0 (w = left-perpendicular of u).
  ConvexPolygon poly;
  poly.vertices = {
      origin - w * half_across,
      origin + u * along - w * half_across,
      origin + u * along + w * half_across,
      origin + w * half_across,
  };
  return poly;
}

}  // namespace

std::optional<ParkingScenario> try_build_scenario(const ScenarioCase& scenario_case,
                                                  const VehicleParams& vehicle,
                                                  const PlacementOptions& placement,
                                                  std::string* reason) {
  vehicle.validate();
  const double rw = scenario_case.rw;
  const double sl = scenario_case.sl;
  const double sw = scenario_case.sw;
  if (!(rw > 0.0) || !(sl > 0.0) || !(sw > 0.0)) {
    if (reason) *reason = "non-positive scenario dimension";
    return std::nullopt;
  }
  if (!(scenario_case.y0 >= 0.0)) {
    if (reason) *reason = "negative initial gap y0";
    return std::nullopt;
  }

  ParkingScenario sc;
  sc.case_def = scenario_case;
  sc.vehicle = vehicle;
  const double lr = vehicle.rear_overhang;
  const double lf = vehicle.front_length;

  double x0 = 0.0;
  switch (scenario_case.kind) {
    case SlotKind::parallel: {
      sc.slot_polygon = region_from_rect(-sl / 2.0, rw, sl / 2.0, rw + sw, "slot").polygon;
      sc.slot_axis_in = {0.0, 1.0};
      sc.slot_opening_center = {0.0, rw};
      sc.target_pose = Pose2D{-(lf - lr) / 2.0, rw + sw / 2.0, 0.0};
      append_flank_and_boundary(sc.regions, sl / 2.0, rw, sw);
      x0 = sl / 2.0 + placement.parallel_standoff;
      break;
    }
    case SlotKind::reverse: {
      sc.slot_polygon = region_from_rect(-sw / 2.0, rw, sw / 2.0, rw + sl, "slot").polygon;
      sc.slot_axis_in = {0.0, 1.0};
      sc.slot_opening_center = {0.0, rw};
      sc.target_pose = Pose2D{0.0, rw + (sl + lf - lr) / 2.0, -std::numbers::pi / 2.0};
      append_flank_and_boundary(sc.regions, sw / 2.0, rw, sl);
      x0 = placement.reverse_x0;
      break;
    }
    case SlotKind::angle: {
      const double tilt = 3.0 * std::numbers::pi / 4.0;  // slot axis points up-road
      const Vec2 u{std::cos(tilt), std::sin(tilt)};
      const Vec2 w = u.perp();
      // Anchor the mouth's lowest corner on the opening line, slot centred at x=0.
      const Vec2 origin{-u.x * sl / 2.0, rw + std::abs(w.y) * sw / 2.0};
      const ConvexPolygon slot_poly = rect_polygon(origin, u, w, sl, sw / 2.0);
      sc.slot_polygon = slot_poly;
      sc.slot_axis_in = u;
      sc.slot_opening_center = origin;
      const Vec2 rear_axle = origin + u * (sl / 2.0) + u * ((lf - lr) / 2.0);
      sc.target_pose = Pose2D{rear_axle.x, rear_axle.y, tilt - std::numbers::pi};

      const double pitch = sw / std::abs(w.x);  // x spacing between adjacent slot axes
      const HalfPlane above_road{0.0, -1.0, rw};  // keeps y >= rw
      for (double side : {-1.0, 1.0}) {
        ConvexPolygon shifted = slot_poly;
        for (Vec2& v : shifted.vertices) v.x += side * pitch;
        ConvexPolygon clipped = clip_polygon(shifted, above_road);
        if (clipped.vertices.size() >= 3) {
          sc.regions.push_back(region_from_polygon(clipped.vertices,
                                                   side < 0 ? "flank_rear" : "flank_front"));
        }
      }
      sc.regions.push_back(region_from_rect(-kWorkspaceHalfWidth, -kBoundaryStripDepth,
                                            kWorkspaceHalfWidth, 0.0, "road_boundary"));
      x0 = placement.angle_x0;
      break;
    }
  }
  if (placement.x0_override) x0 = *placement.x0_override;
  sc.initial_pose = Pose2D{x0, scenario_case.y1, scenario_case.theta0};

  if (!collision_free(sc.initial_pose, vehicle, sc.regions)) {
    if (reason) *reason = "initial footprint overlaps an impassable region";
    return std::nullopt;
  }
  return sc;
}

ParkingScenario build_scenario(const ScenarioCase& scenario_case, const VehicleParams& vehicle,
                               const PlacementOptions& placement) {
  std::string reason;
  auto sc = try_build_scenario(scenario_case, vehicle, placement, &reason);
  if (!sc) throw std::invalid_argument("build_scenario: " + reason);
  return *sc;
}

std::vector<double> arithmetic_levels(double lo, double hi, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("arithmetic_levels: step must be > 0");
  if (hi < lo) throw std::invalid_argument("arithmetic_levels: hi < lo");
  std::vector<double> levels;
  for (int i = 0;; ++i) {
    const double v = lo + step * i;
    if (v > hi + 1e-9) break;
    levels.push_back(v);
  }
  return levels;
}

GridConfig GridConfig::evaluation_default() {
  GridConfig g;
  const std::vector<double> headings = arithmetic_levels(-90.0, 90.0, 10.0);
  g.parallel.rw_levels = {4.5, 4.0, 3.5};
  g.parallel.sl_levels = arithmetic_levels(3.82, 7.35, 0.1);
  g.parallel.sw_levels = {2.5};
  g.parallel.theta0_deg_levels = headings;
  g.reverse.rw_levels = {7.0, 6.0, 5.0};
  g.reverse.sl_levels = {4.82};
  g.reverse.sw_levels = arithmetic_levels(1.67, 3.27, 0.05);
  g.reverse.theta0_deg_levels = headings;
  g.angle.rw_levels = {4.5, 4.0, 3.5};
  g.angle.sl_levels = {4.82};
  g.angle.sw_levels = arithmetic_levels(1.67, 3.27, 0.05);
  g.angle.theta0_deg_levels = headings;
  return g;
}

const KindGrid& GridConfig::for_kind(SlotKind kind) const {
  switch (kind) {
    case SlotKind::parallel: return parallel;
    case SlotKind::reverse: return reverse;
    case SlotKind::angle: return angle;
  }
  throw std::logic_error("unknown slot kind");
}

KindGrid& GridConfig::for_kind(SlotKind kind) {
  return const_cast<KindGrid&>(static_cast<const GridConfig*>(this)->for_kind(kind));
}

GridResult grid_cases(const GridConfig& grid, const VehicleParams& vehicle,
                      const PlacementOptions& placement) {
  GridResult out;
  bool any_enabled = false;
  for (SlotKind kind : {SlotKind::parallel, SlotKind::reverse, SlotKind::angle}) {
    const KindGrid& kg = grid.for_kind(kind);
    if (!kg.enabled) continue;
    any_enabled = true;
    if (kg.rw_levels.empty() || kg.sl_levels.empty() || kg.sw_levels.empty() ||
        kg.theta0_deg_levels.empty()) {
      throw std::invalid_argument(std::string("grid_cases: empty factor levels for ") +
                                  to_string(kind));
    }
    if (!(kg.y0_step > 0.0)) throw std::invalid_argument("grid_cases: y0_step must be > 0");
    for (double rw : kg.rw_levels) {
      const std::vector<double> y0_levels = arithmetic_levels(0.0, rw, kg.y0_step);
      for (double sl : kg.sl_levels) {
        for (double sw : kg.sw_levels) {
          for (double theta_deg : kg.theta0_deg_levels) {
            for (double y0 : y0_levels) {
              ScenarioCase c;
              c.kind = kind;
              c.rw = rw;
              c.sl = sl;
              c.sw = sw;
              c.theta0 = theta_deg * std::numbers::pi / 180.0;
              c.y0 = y0;
              c.y1 = default_y1(rw, y0, vehicle);
              if (try_build_scenario(c, vehicle, placement, nullptr)) {
                out.cases.push_back(c);
              } else {
                ++out.excluded;
              }
            }
          }
        }
      }
    }
  }
  if (!any_enabled) throw std::invalid_argument("grid_cases: no kind enabled");
  return out;
}

std::string cases_to_csv(const std::vector<ScenarioCase>& cases) {
  std::string out = "kind,rw,sl,sw,theta0,y0,y1\n";
  for (const ScenarioCase& c : cases) {
    out += to_string(c.kind);
    for (double v : {c.rw, c.sl, c.sw, c.theta0, c.y0, c.y1}) {
      out += ',';
      out += format_number(v);
    }
    out += '\n';
  }
  return out;
}

std::vector<ScenarioCase> cases_from_csv(const std::string& text) {
  std::vector<ScenarioCase> cases;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line.rfind("kind,", 0) == 0) continue;  // header
    }
    std::istringstream ls(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() != 7) throw std::invalid_argument("cases_from_csv: bad row: " + line);
    ScenarioCase c;
    auto kind = slot_kind_from_string(fields[0]);
    if (!kind) throw std::invalid_argument("cases_from_csv: bad kind: " + fields[0]);
    c.kind = *kind;
    c.rw = std::stod(fields[1]);
    c.sl = std::stod(fields[2]);
    c.sw = std::stod(fields[3]);
    c.theta0 = std::stod(fields[4]);
    c.y0 = std::stod(fields[5]);
    c.y1 = std::stod(fields[6]);
    cases.push_back(c);
  }
  return cases;
}

}  // namespace parkplan
