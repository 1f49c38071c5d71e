#include "parkplan/mirror.hpp"

#include <cmath>

namespace parkplan {

MirrorBand mirror_band(SlotKind kind, double theta, const VehicleParams& vehicle,
                       double slot_width) {
  const double r_min = vehicle.min_turn_radius();
  const double tilt = std::abs(theta);
  MirrorBand band;
  switch (kind) {
    case SlotKind::parallel:
      // Swing clearance of the rear axle for the remaining rotation, against
      // the lateral room left between the parked body and the slot sides.
      band.lower = r_min * (1.0 - std::cos(tilt));
      band.upper = slot_width / 2.0 - vehicle.rear_overhang * std::sin(tilt) -
                   (vehicle.width / 2.0) * std::cos(tilt);
      break;
    case SlotKind::reverse:
      band.lower = r_min * (1.0 - std::cos(std::numbers::pi / 2.0 - tilt));
      break;
    case SlotKind::angle:
      band.lower = r_min * (1.0 - std::cos(std::numbers::pi / 4.0 - tilt));
      break;
  }
  return band;
}

MirrorPolicy default_mirror_policy(SlotKind kind) {
  return kind == SlotKind::parallel ? MirrorPolicy::band_mid : MirrorPolicy::theorem_min;
}

namespace {

MirrorSpec make_spec(const ParkingScenario& sc, const Vec2& normal, double offset,
                     double slide = 0.0) {
  MirrorSpec m;
  m.normal = normal;
  m.offset = offset;
  const Vec2 tangent{-normal.y, normal.x};
  m.line_point = sc.target_pose.position() + normal * offset + tangent * slide;
  const Vec2 vpos = m.line_point * 2.0 - sc.target_pose.position();
  m.virtual_target = Pose2D{vpos.x, vpos.y, sc.target_pose.theta};
  m.valid = true;
  return m;
}

}  // namespace

MirrorSpec choose_mirror(const ParkingScenario& sc, MirrorPolicy policy,
                         const MirrorOptions& opt) {
  const SlotKind kind = sc.case_def.kind;
  const MirrorBand band = mirror_band(kind, 0.0, sc.vehicle, sc.slot_width());
  MirrorSpec reject;
  if (band.empty()) {
    reject.reject_reason = "no admissible mirror offset for these dimensions";
    return reject;
  }

  // Parallel: the line sits deeper in the slot than the target, so the final
  // forward nudge is the reflected tail of the reverse approach. Bay and
  // angle: the line sits on the road behind the target along the slot axis,
  // so the reversing entry is the reflected tail of the forward approach.
  const Vec2 normal = kind == SlotKind::parallel ? sc.slot_axis_in : -sc.slot_axis_in;

  double offset = 0.0;
  double slide = 0.0;
  switch (policy) {
    case MirrorPolicy::band_mid:
      if (std::isinf(band.upper)) {
        reject.reject_reason = "band midpoint undefined for a one-sided band";
        return reject;
      }
      offset = band.midpoint();
      break;
    case MirrorPolicy::theorem_min:
      offset = band.lower + opt.band_margin;
      break;
    case MirrorPolicy::corridor: {
      if (kind == SlotKind::parallel) return choose_mirror(sc, MirrorPolicy::band_mid, opt);
      const double standoff =
          kind == SlotKind::reverse ? opt.reverse_standoff : opt.angle_standoff;
      const double depth =
          sc.slot_axis_in.dot(sc.target_pose.position() - sc.initial_pose.position());
      offset = depth + standoff;
      break;
    }
  }
  if (offset < band.lower - 1e-9) {
    reject.reject_reason = "selected offset falls below the admissible band";
    return reject;
  }
  if (offset > band.upper + 1e-9) {
    reject.reject_reason = "selected offset exceeds the admissible band";
    return reject;
  }

  return make_spec(sc, normal, offset);
}

MirrorSpec choose_mirror(const ParkingScenario& sc, const MirrorOptions& opt) {
  return choose_mirror(sc, default_mirror_policy(sc.case_def.kind), opt);
}

Vec2 reflect_point(const MirrorSpec& mirror, const Vec2& p) {
  return mirror.line_point * 2.0 - p;
}

Pose2D reflect_pose(const MirrorSpec& mirror, const Pose2D& pose) {
  const Vec2 rp = reflect_point(mirror, pose.position());
  return Pose2D{rp.x, rp.y, pose.theta};
}

std::optional<size_t> first_crossing(const MirrorSpec& mirror,
                                     const std::vector<Pose2D>& poses) {
  for (size_t i = 0; i < poses.size(); ++i) {
    if (mirror.side(poses[i].position()) >= 0.0) return i;
  }
  return std::nullopt;
}

}  // namespace parkplan
