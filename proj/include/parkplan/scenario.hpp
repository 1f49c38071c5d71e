#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "parkplan/geometry.hpp"

namespace parkplan {

// Physical vehicle description and actuation limits.
struct VehicleParams {
  double wheelbase = 2.5;        // rear to front axle [m]
  double rear_overhang = 0.71;   // rear axle to rear bumper [m]
  double front_length = 3.11;    // rear axle to front bumper [m]
  double width = 1.67;           // body width [m]
  double v_min = -3.0;           // speed bounds [m/s]
  double v_max = 3.0;
  double a_min = -5.0;           // acceleration bounds [m/s^2]
  double a_max = 3.0;
  double delta_max = 0.6;        // steering bound, symmetric [rad]
  double tau_a = 0.3;            // acceleration actuator lag [s]
  double tau_delta = 0.1;        // steering actuator lag [s]

  double length() const { return rear_overhang + front_length; }
  // Tightest achievable turning radius of the rear axle.
  double min_turn_radius() const { return wheelbase / std::tan(delta_max); }
  // Throws std::invalid_argument when any parameter is non-physical.
  void validate() const;
};

enum class SlotKind : std::uint8_t { parallel, reverse, angle };

const char* to_string(SlotKind kind);
std::optional<SlotKind> slot_kind_from_string(const std::string& name);

// Vehicle outline for a rear-axle pose, CCW corner order.
ConvexPolygon footprint(const Pose2D& pose, const VehicleParams& vehicle);

// Six collision probe points: four corners plus the two side midpoints.
// Order: front-right, front-left, rear-left, rear-right, mid-right, mid-left.
std::array<Vec2, 6> feature_points(const Pose2D& pose, const VehicleParams& vehicle);

// Body-frame offsets (longitudinal from rear axle, lateral) of the six points.
std::array<Vec2, 6> feature_point_offsets(const VehicleParams& vehicle);

// True when the footprint touches none of the regions. Regions are closed:
// boundary contact counts as a collision.
bool collision_free(const Pose2D& pose, const VehicleParams& vehicle,
                    const std::vector<ConvexRegion>& regions);
bool collision_free(const ConvexPolygon& body, const std::vector<ConvexRegion>& regions);

// One enumerated evaluation case. Angles in radians, distances in metres.
struct ScenarioCase {
  SlotKind kind = SlotKind::parallel;
  double rw = 0.0;      // road width: slot opening line to road boundary
  double sl = 0.0;      // slot length along its axis
  double sw = 0.0;      // slot width across its axis
  double theta0 = 0.0;  // initial heading
  double y0 = 0.0;      // initial lateral gap, vehicle side to slot opening line
  double y1 = 0.0;      // initial lateral offset of the rear axle from the road boundary
};

// Initial longitudinal placement conventions (rear-axle x at start).
struct PlacementOptions {
  // Parallel: rear axle this far past the slot's forward edge.
  double parallel_standoff = 1.0;
  // Bay and angle slots: absolute rear-axle x at start (slot centred near x=0).
  double reverse_x0 = -4.0;
  double angle_x0 = -1.0;
  std::optional<double> x0_override;  // wins over the per-kind rules when set
};

// World model of one parking problem. Frame: x along the road axis, y from the
// road boundary (y=0) toward the slot side; the slot opens at y = rw.
struct ParkingScenario {
  ScenarioCase case_def;
  VehicleParams vehicle;

  Pose2D initial_pose;
  Pose2D target_pose;
  ConvexPolygon slot_polygon;  // CCW
  Vec2 slot_axis_in;           // unit vector pointing from the opening into the slot
  Vec2 slot_opening_center;    // midpoint of the slot mouth on the opening line
  std::vector<ConvexRegion> regions;  // impassable areas near the slot

  double road_width() const { return case_def.rw; }
  double slot_length() const { return case_def.sl; }
  double slot_width() const { return case_def.sw; }
};

// Resolves the default initial lateral offset for a case that omits y1:
// rear axle sits y0 + width/2 below the opening line, clamped into the road.
double default_y1(double rw, double y0, const VehicleParams& vehicle);

// Builds the world for a case. Throws std::invalid_argument for non-physical
// dimensions or when the initial footprint already touches a region.
ParkingScenario build_scenario(const ScenarioCase& scenario_case, const VehicleParams& vehicle,
                               const PlacementOptions& placement = {});

// Non-throwing variant used by grid enumeration: nullopt with a reason instead.
std::optional<ParkingScenario> try_build_scenario(const ScenarioCase& scenario_case,
                                                  const VehicleParams& vehicle,
                                                  const PlacementOptions& placement,
                                                  std::string* reason);

// Inclusive arithmetic sequence lo, lo+step, ... capped at hi (1e-9 slack).
std::vector<double> arithmetic_levels(double lo, double hi, double step);

// Factor levels for one slot kind. theta0 levels are given in degrees.
struct KindGrid {
  bool enabled = true;
  std::vector<double> rw_levels;
  std::vector<double> sl_levels;
  std::vector<double> sw_levels;
  std::vector<double> theta0_deg_levels;
  double y0_step = 0.1;  // y0 runs 0..rw at this step per rw level
};

struct GridConfig {
  KindGrid parallel;
  KindGrid reverse;
  KindGrid angle;

  // Full evaluation grid: three road widths per kind, swept slot dimension,
  // headings -90..90 deg step 10, lateral offsets 0..rw step 0.1.
  static GridConfig evaluation_default();

  const KindGrid& for_kind(SlotKind kind) const;
  KindGrid& for_kind(SlotKind kind);
};

struct GridResult {
  std::vector<ScenarioCase> cases;  // usable cases, deterministic order
  std::int64_t excluded = 0;        // cases dropped for initial-footprint collisions
};

// Enumerates the grid in a fixed order (kind, rw, sl, sw, theta0, y0) and
// drops cases whose initial footprint already collides. Throws on empty grids.
GridResult grid_cases(const GridConfig& grid, const VehicleParams& vehicle,
                      const PlacementOptions& placement = {});

// Case-list serialization: header "kind,rw,sl,sw,theta0,y0,y1", one case per line.
std::string cases_to_csv(const std::vector<ScenarioCase>& cases);
std::vector<ScenarioCase> cases_from_csv(const std::string& text);

}  // namespace parkplan
