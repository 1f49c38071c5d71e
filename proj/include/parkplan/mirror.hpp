#pragma once

#include <limits>
#include <optional>
#include <string>

#include "parkplan/scenario.hpp"

namespace parkplan {

// Admissible range for the mirror-line offset from the target, measured along
// the mirror normal. Empty when lower exceeds upper.
struct MirrorBand {
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();

  bool empty() const { return !(lower <= upper); }
  double midpoint() const { return 0.5 * (lower + upper); }
};

// Offset band as a function of the body tilt still to be travelled.
// `theta` is the magnitude of the heading progress toward slot-axis
// alignment: 0 means road-parallel, and the bound shrinks as the body
// rotates toward its parked orientation. Parallel slots also bound the
// offset from above so the line stays inside the slot clearance.
MirrorBand mirror_band(SlotKind kind, double theta, const VehicleParams& vehicle,
                       double slot_width);

// How the mirror-line offset is selected.
//  band_mid:    midpoint of the admissible band at zero tilt.
//  theorem_min: lower band edge at zero tilt plus a fixed safety margin.
//  corridor:    line dropped just behind the start pose, measured along the
//               slot axis, so the approach corridor stays on one side.
enum class MirrorPolicy { band_mid, theorem_min, corridor };

struct MirrorOptions {
  double band_margin = 0.3;       // theorem_min: added above the lower bound
  double reverse_standoff = 1.0;  // corridor: depth past the start, bay slots
  double angle_standoff = 2.0;    // corridor: depth past the start, angled slots
};

// Mirror line through `line_point` with unit `normal` pointing from the target
// toward the line. Planning aims at `virtual_target` (the target point-reflected
// through line_point with its heading kept); the executed motion after the
// crossing is the point reflection of the planned one.
struct MirrorSpec {
  bool valid = false;
  std::string reject_reason;  // set when valid is false
  Vec2 normal;                // unit, target side has side() < 0
  double offset = 0.0;        // distance target -> line, >= 0
  Vec2 line_point;            // canonical crossing point p*
  Pose2D virtual_target;

  // Signed distance from the mirror line, negative on the target side.
  double side(const Vec2& p) const { return normal.dot(p - line_point); }
};

// Default offset selection per slot kind.
MirrorPolicy default_mirror_policy(SlotKind kind);

// Places the mirror line for a scenario. The parallel line sits deeper in the
// slot than the target; bay and angle lines sit on the road, behind the target
// along the slot axis. Invalid (with a reason) when no admissible offset exists
// or when the start pose is not on the crossing side of the line.
MirrorSpec choose_mirror(const ParkingScenario& sc, MirrorPolicy policy,
                         const MirrorOptions& opt = {});
MirrorSpec choose_mirror(const ParkingScenario& sc, const MirrorOptions& opt = {});

// Point reflection through the mirror line's canonical crossing point.
Vec2 reflect_point(const MirrorSpec& mirror, const Vec2& p);
// Position reflected, heading kept: negated commands retrace the heading
// profile while the position path flips through the crossing point.
Pose2D reflect_pose(const MirrorSpec& mirror, const Pose2D& pose);

// First index whose position reaches the far side of the line (side >= 0),
// or nullopt when the sequence never crosses.
std::optional<size_t> first_crossing(const MirrorSpec& mirror,
                                     const std::vector<Pose2D>& poses);

}  // namespace parkplan
