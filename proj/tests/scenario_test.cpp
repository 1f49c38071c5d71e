#include "doctest.h"

#include <cmath>

#include "parkplan/scenario.hpp"

using namespace parkplan;

namespace {

const double kPi = std::numbers::pi;

ScenarioCase make_case(SlotKind kind, double rw, double sl, double sw, double theta0,
                       double y0, const VehicleParams& vehicle) {
  ScenarioCase c;
  c.kind = kind;
  c.rw = rw;
  c.sl = sl;
  c.sw = sw;
  c.theta0 = theta0;
  c.y0 = y0;
  c.y1 = default_y1(rw, y0, vehicle);
  return c;
}

bool footprint_inside(const ConvexPolygon& body, const ConvexPolygon& container) {
  for (const Vec2& v : body.vertices) {
    if (!container.contains(v, 1e-9)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("vehicle defaults give the expected derived dimensions") {
  const VehicleParams v;
  v.validate();
  CHECK(v.length() == doctest::Approx(3.82));
  CHECK(v.min_turn_radius() == doctest::Approx(3.6542405).epsilon(1e-6));
}

TEST_CASE("vehicle validation rejects non-physical parameters") {
  VehicleParams v;
  v.wheelbase = 0.0;
  CHECK_THROWS(v.validate());
  v = VehicleParams{};
  v.v_min = 0.5;
  CHECK_THROWS(v.validate());
  v = VehicleParams{};
  v.delta_max = 1.6;
  CHECK_THROWS(v.validate());
}

TEST_CASE("footprint corners at the identity pose") {
  const VehicleParams v;
  const ConvexPolygon fp = footprint(Pose2D{0.0, 0.0, 0.0}, v);
  REQUIRE(fp.vertices.size() == 4);
  CHECK(fp.vertices[0].x == doctest::Approx(3.11));
  CHECK(fp.vertices[0].y == doctest::Approx(-0.835));
  CHECK(fp.vertices[1].x == doctest::Approx(3.11));
  CHECK(fp.vertices[1].y == doctest::Approx(0.835));
  CHECK(fp.vertices[2].x == doctest::Approx(-0.71));
  CHECK(fp.vertices[2].y == doctest::Approx(0.835));
  CHECK(fp.vertices[3].x == doctest::Approx(-0.71));
  CHECK(fp.vertices[3].y == doctest::Approx(-0.835));
}

TEST_CASE("feature points cover corners and side midpoints") {
  const VehicleParams v;
  const auto pts = feature_points(Pose2D{0.0, 0.0, 0.0}, v);
  CHECK(pts[0].x == doctest::Approx(3.11));   // front-right
  CHECK(pts[0].y == doctest::Approx(-0.835));
  CHECK(pts[1].y == doctest::Approx(0.835));  // front-left
  CHECK(pts[2].x == doctest::Approx(-0.71));  // rear-left
  CHECK(pts[3].y == doctest::Approx(-0.835)); // rear-right
  CHECK(pts[4].x == doctest::Approx(1.2));    // mid-right, body centre abscissa
  CHECK(pts[4].y == doctest::Approx(-0.835));
  CHECK(pts[5].y == doctest::Approx(0.835));

  // Rigid-body behaviour: translation shifts, rotation maps through rotated().
  const Pose2D moved{2.0, -1.0, 0.0};
  const auto shifted = feature_points(moved, v);
  for (size_t i = 0; i < pts.size(); ++i) {
    CHECK(shifted[i].x == doctest::Approx(pts[i].x + 2.0));
    CHECK(shifted[i].y == doctest::Approx(pts[i].y - 1.0));
  }
  const Pose2D turned{0.0, 0.0, kPi / 2.0};
  const auto rot = feature_points(turned, v);
  for (size_t i = 0; i < pts.size(); ++i) {
    const Vec2 expect = pts[i].rotated(kPi / 2.0);
    CHECK(rot[i].x == doctest::Approx(expect.x));
    CHECK(rot[i].y == doctest::Approx(expect.y));
  }
}

TEST_CASE("collision_free honours closed region boundaries") {
  const VehicleParams v;
  std::vector<ConvexRegion> regions;
  regions.push_back(region_from_rect(10.0, -1.0, 12.0, 1.0, "block"));
  CHECK(collision_free(Pose2D{0.0, 0.0, 0.0}, v, regions));
  // Front bumper exactly on the block face.
  CHECK_FALSE(collision_free(Pose2D{10.0 - 3.11, 0.0, 0.0}, v, regions));
  CHECK(collision_free(Pose2D{10.0 - 3.11 - 1e-6, 0.0, 0.0}, v, regions));
  CHECK_FALSE(collision_free(Pose2D{11.0, 0.0, 0.0}, v, regions));
}

TEST_CASE("default_y1 keeps the rear axle inside the road") {
  const VehicleParams v;
  CHECK(default_y1(4.5, 1.0, v) == doctest::Approx(4.5 - 1.0 - 0.835));
  CHECK(default_y1(4.5, 0.0, v) == doctest::Approx(3.665));
  // Large gaps clamp at the near side, not below it.
  CHECK(default_y1(4.5, 4.5, v) == doctest::Approx(0.835));
}

TEST_CASE("parallel scenario layout") {
  const VehicleParams v;
  const ScenarioCase c = make_case(SlotKind::parallel, 4.5, 6.5, 2.5, 0.0, 1.0, v);
  const ParkingScenario sc = build_scenario(c, v);

  CHECK(sc.target_pose.x == doctest::Approx(-1.2));
  CHECK(sc.target_pose.y == doctest::Approx(4.5 + 1.25));
  CHECK(sc.target_pose.theta == doctest::Approx(0.0));
  CHECK(sc.slot_axis_in.y == doctest::Approx(1.0));
  CHECK(sc.slot_opening_center.y == doctest::Approx(4.5));
  REQUIRE(sc.regions.size() == 3);

  // Target footprint parked fully inside the slot, clear of every region.
  CHECK(footprint_inside(footprint(sc.target_pose, v), sc.slot_polygon));
  CHECK(collision_free(sc.target_pose, v, sc.regions));

  // Start: rear axle one standoff past the slot's forward edge, on the road.
  CHECK(sc.initial_pose.x == doctest::Approx(6.5 / 2.0 + 1.0));
  CHECK(sc.initial_pose.y == doctest::Approx(c.y1));
  CHECK(collision_free(sc.initial_pose, v, sc.regions));
}

TEST_CASE("reverse scenario layout") {
  const VehicleParams v;
  const ScenarioCase c = make_case(SlotKind::reverse, 7.0, 4.82, 2.77, 0.0, 1.0, v);
  const ParkingScenario sc = build_scenario(c, v);

  CHECK(sc.target_pose.x == doctest::Approx(0.0));
  CHECK(sc.target_pose.y == doctest::Approx(7.0 + (4.82 + 3.11 - 0.71) / 2.0));
  CHECK(sc.target_pose.theta == doctest::Approx(-kPi / 2.0));
  CHECK(footprint_inside(footprint(sc.target_pose, v), sc.slot_polygon));
  CHECK(collision_free(sc.target_pose, v, sc.regions));
  CHECK(sc.initial_pose.x == doctest::Approx(-4.0));

  // Nose-out target: the front bumper sits nearer the opening than the tail.
  const ConvexPolygon fp = footprint(sc.target_pose, v);
  CHECK(fp.vertices[0].y < fp.vertices[2].y);
}

TEST_CASE("angle scenario layout") {
  const VehicleParams v;
  const ScenarioCase c = make_case(SlotKind::angle, 4.5, 4.82, 2.77, 0.0, 1.0, v);
  const ParkingScenario sc = build_scenario(c, v);

  CHECK(sc.target_pose.theta == doctest::Approx(-kPi / 4.0));
  CHECK(sc.target_pose.x == doctest::Approx(-0.8485281).epsilon(1e-6));
  CHECK(sc.target_pose.y == doctest::Approx(8.0319984).epsilon(1e-6));
  CHECK(sc.slot_axis_in.x == doctest::Approx(-std::sqrt(0.5)));
  CHECK(sc.slot_axis_in.y == doctest::Approx(std::sqrt(0.5)));
  CHECK(footprint_inside(footprint(sc.target_pose, v), sc.slot_polygon));
  CHECK(collision_free(sc.target_pose, v, sc.regions));

  // The slot mouth's lowest corner sits on the opening line.
  double lowest = 1e9;
  for (const Vec2& vert : sc.slot_polygon.vertices) lowest = std::min(lowest, vert.y);
  CHECK(lowest == doctest::Approx(4.5));

  // Neighbouring slots are clipped to stay past the opening line.
  int flanks = 0;
  for (const ConvexRegion& r : sc.regions) {
    if (r.label.rfind("flank", 0) == 0) {
      ++flanks;
      for (const Vec2& vert : r.polygon.vertices) CHECK(vert.y >= 4.5 - 1e-9);
    }
  }
  CHECK(flanks == 2);
}

TEST_CASE("scenario construction rejects bad input") {
  const VehicleParams v;
  ScenarioCase c = make_case(SlotKind::parallel, 0.0, 6.5, 2.5, 0.0, 1.0, v);
  CHECK_THROWS(build_scenario(c, v));

  c = make_case(SlotKind::parallel, 4.5, 6.5, 2.5, 0.0, 1.0, v);
  c.y0 = -0.5;
  std::string reason;
  CHECK_FALSE(try_build_scenario(c, v, {}, &reason).has_value());
  CHECK_FALSE(reason.empty());

  // Facing the flank blocks from touching distance: footprint already collides.
  c = make_case(SlotKind::parallel, 4.5, 6.5, 2.5, kPi / 2.0, 0.0, v);
  reason.clear();
  CHECK_FALSE(try_build_scenario(c, v, {}, &reason).has_value());
  CHECK(reason == "initial footprint overlaps an impassable region");
}

TEST_CASE("arithmetic_levels includes both ends despite rounding") {
  CHECK(arithmetic_levels(3.82, 7.35, 0.1).size() == 36);
  CHECK(arithmetic_levels(1.67, 3.27, 0.05).size() == 33);
  CHECK(arithmetic_levels(-90.0, 90.0, 10.0).size() == 19);
  CHECK(arithmetic_levels(0.0, 4.5, 0.1).size() == 46);
  const auto single = arithmetic_levels(2.5, 2.5, 1.0);
  REQUIRE(single.size() == 1);
  CHECK(single[0] == 2.5);
  CHECK_THROWS(arithmetic_levels(0.0, 1.0, 0.0));
}

TEST_CASE("evaluation grid matches the published factor levels") {
  const GridConfig g = GridConfig::evaluation_default();
  CHECK(g.parallel.rw_levels == std::vector<double>{4.5, 4.0, 3.5});
  CHECK(g.parallel.sl_levels.size() == 36);
  CHECK(g.parallel.sw_levels == std::vector<double>{2.5});
  CHECK(g.reverse.rw_levels == std::vector<double>{7.0, 6.0, 5.0});
  CHECK(g.reverse.sl_levels == std::vector<double>{4.82});
  CHECK(g.reverse.sw_levels.size() == 33);
  CHECK(g.angle.sw_levels.size() == 33);
  CHECK(g.parallel.theta0_deg_levels.size() == 19);
  CHECK(g.parallel.theta0_deg_levels.front() == -90.0);
  CHECK(g.parallel.theta0_deg_levels.back() == 90.0);
}

TEST_CASE("grid enumeration is deterministic and counts exclusions") {
  const VehicleParams v;
  GridConfig g;
  g.parallel.rw_levels = {4.5};
  g.parallel.sl_levels = {6.5};
  g.parallel.sw_levels = {2.5};
  g.parallel.theta0_deg_levels = {0.0};
  g.reverse.enabled = false;
  g.angle.enabled = false;

  const GridResult first = grid_cases(g, v);
  const GridResult second = grid_cases(g, v);
  CHECK(first.cases.size() == second.cases.size());
  CHECK(first.excluded == second.excluded);
  CHECK(first.cases.size() + static_cast<size_t>(first.excluded) == 46);
  CHECK(first.cases.size() > 0);
  for (size_t i = 0; i < first.cases.size(); ++i) {
    CHECK(first.cases[i].y0 == second.cases[i].y0);
    CHECK(first.cases[i].y1 == doctest::Approx(default_y1(4.5, first.cases[i].y0, v)));
  }
  // y0 strictly increases within the single (rw, sl, sw, theta0) cell.
  for (size_t i = 1; i < first.cases.size(); ++i) {
    CHECK(first.cases[i].y0 > first.cases[i - 1].y0);
  }

  GridConfig empty;
  empty.parallel.enabled = false;
  empty.reverse.enabled = false;
  empty.angle.enabled = false;
  CHECK_THROWS(grid_cases(empty, v));

  GridConfig missing;
  missing.reverse.enabled = false;
  missing.angle.enabled = false;
  CHECK_THROWS(grid_cases(missing, v));  // parallel enabled but has no levels
}

TEST_CASE("case list survives a CSV round trip exactly") {
  const VehicleParams v;
  std::vector<ScenarioCase> cases;
  cases.push_back(make_case(SlotKind::parallel, 4.5, 6.5, 2.5, 10.0 * kPi / 180.0, 1.0, v));
  cases.push_back(make_case(SlotKind::reverse, 7.0, 4.82, 2.77, -0.3, 2.2, v));
  cases.push_back(make_case(SlotKind::angle, 3.5, 4.82, 1.67, 0.0, 0.0, v));

  const std::string csv = cases_to_csv(cases);
  CHECK(csv.rfind("kind,rw,sl,sw,theta0,y0,y1\n", 0) == 0);
  const auto parsed = cases_from_csv(csv);
  REQUIRE(parsed.size() == cases.size());
  for (size_t i = 0; i < cases.size(); ++i) {
    CHECK(parsed[i].kind == cases[i].kind);
    CHECK(parsed[i].rw == cases[i].rw);
    CHECK(parsed[i].sl == cases[i].sl);
    CHECK(parsed[i].sw == cases[i].sw);
    CHECK(parsed[i].theta0 == cases[i].theta0);
    CHECK(parsed[i].y0 == cases[i].y0);
    CHECK(parsed[i].y1 == cases[i].y1);
  }

  CHECK_THROWS(cases_from_csv("kind,rw\nparallel,1\n"));
  CHECK_THROWS(cases_from_csv("diagonal,1,2,3,4,5,6\n"));
}
