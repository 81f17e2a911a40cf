#pragma once

// Synthetic sensor geometry. Table plane is z = 0, the participant sits at
// negative y. Head angles are (roll, pitch, yaw) in radians with pitch
// positive downward and yaw positive toward +x.

#include <nlohmann/json.hpp>

#include "mmref/core/types.hpp"

namespace mmref::sim {

using core::Vec2;
using core::Vec3;

/// Unit direction for (pitch, yaw): (sin yaw cos pitch, cos yaw cos pitch, -sin pitch).
Vec3 direction_from_angles(double pitch, double yaw);

/// Intersection of the ray origin + t d (t > 0) with the plane z = plane_z.
/// Throws std::domain_error for rays parallel to or pointing away from it.
Vec2 intersect_plane(const Vec3& origin, const Vec3& d, double plane_z = 0.0);

/// Treats the head angles as the gaze ray. The poor-calibration baseline.
Vec2 naive_projection(const Vec3& head_angles, const Vec3& head_position, double plane_z = 0.0);

/// Head pose follows gaze only partially (the eyes do the rest): the sensor
/// sees gain * gaze angle + bias, with some roll coupled to yaw.
struct GazeModel {
  Vec3 eye{0.0, -0.9, 0.7};
  double yaw_gain = 0.65;
  double pitch_gain = 0.6;
  double yaw_bias = 0.0;
  double pitch_bias = 0.0;
  double roll_coupling = 0.15;

  Vec3 head_angles_for(const Vec2& point) const;
  /// Ground-truth inverse of head_angles_for.
  Vec2 table_point(const Vec3& head_angles) const;
};

/// Finger direction with the pitch under-reported by the tracker.
struct HandModel {
  Vec3 origin{0.2, -0.5, 0.2};
  double pitch_gain = 0.85;
  double pitch_bias = 0.0;
  double yaw_bias = 0.0;

  Vec3 direction_for(const Vec2& point) const;
  Vec2 table_point(const Vec3& direction) const;
};

nlohmann::json gaze_to_json(const GazeModel& g);
GazeModel gaze_from_json(const nlohmann::json& j);
nlohmann::json hand_to_json(const HandModel& h);
HandModel hand_from_json(const nlohmann::json& j);

}  // namespace mmref::sim
