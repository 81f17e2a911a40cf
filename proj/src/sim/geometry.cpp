#include "mmref/sim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mmref/core/dataset_io.hpp"

namespace mmref::sim {

Vec3 direction_from_angles(double pitch, double yaw) {
  return {std::sin(yaw) * std::cos(pitch), std::cos(yaw) * std::cos(pitch), -std::sin(pitch)};
}

Vec2 intersect_plane(const Vec3& origin, const Vec3& d, double plane_z) {
  if (std::abs(d.z()) < 1e-12) throw std::domain_error("ray is parallel to the table plane");
  const double t = (plane_z - origin.z()) / d.z();
  if (!(t > 0.0)) throw std::domain_error("ray points away from the table plane");
  return {origin.x() + t * d.x(), origin.y() + t * d.y()};
}

Vec2 naive_projection(const Vec3& head_angles, const Vec3& head_position, double plane_z) {
  return intersect_plane(head_position, direction_from_angles(head_angles[1], head_angles[2]), plane_z);
}

namespace {

// Pitch (down-positive) and yaw of the ray from `from` to table point `p`.
std::pair<double, double> angles_towards(const Vec3& from, const Vec2& p) {
  const double dx = p.x() - from.x(), dy = p.y() - from.y(), dz = -from.z();
  return {std::atan2(-dz, std::hypot(dx, dy)), std::atan2(dx, dy)};
}

}  // namespace

Vec3 GazeModel::head_angles_for(const Vec2& point) const {
  const auto [pitch, yaw] = angles_towards(eye, point);
  const double head_yaw = yaw_gain * yaw + yaw_bias;
  return {roll_coupling * head_yaw, pitch_gain * pitch + pitch_bias, head_yaw};
}

Vec2 GazeModel::table_point(const Vec3& a) const {
  const double yaw = (a[2] - yaw_bias) / yaw_gain;
  const double pitch = (a[1] - pitch_bias) / pitch_gain;
  return intersect_plane(eye, direction_from_angles(pitch, yaw));
}

Vec3 HandModel::direction_for(const Vec2& point) const {
  const auto [pitch, yaw] = angles_towards(origin, point);
  return direction_from_angles(pitch_gain * pitch + pitch_bias, yaw + yaw_bias);
}

Vec2 HandModel::table_point(const Vec3& d) const {
  const double reported_pitch = std::asin(std::clamp(-d.z() / d.norm(), -1.0, 1.0));
  const double yaw = std::atan2(d.x(), d.y()) - yaw_bias;
  return intersect_plane(origin, direction_from_angles((reported_pitch - pitch_bias) / pitch_gain, yaw));
}

nlohmann::json gaze_to_json(const GazeModel& g) {
  return {{"eye", core::to_json(g.eye)},           {"yaw_gain", g.yaw_gain},
          {"pitch_gain", g.pitch_gain},            {"yaw_bias", g.yaw_bias},
          {"pitch_bias", g.pitch_bias},            {"roll_coupling", g.roll_coupling}};
}

GazeModel gaze_from_json(const nlohmann::json& j) {
  GazeModel g;
  g.eye = core::vec3_from_json(j.at("eye"));
  g.yaw_gain = j.at("yaw_gain").get<double>();
  g.pitch_gain = j.at("pitch_gain").get<double>();
  g.yaw_bias = j.at("yaw_bias").get<double>();
  g.pitch_bias = j.at("pitch_bias").get<double>();
  g.roll_coupling = j.at("roll_coupling").get<double>();
  return g;
}

nlohmann::json hand_to_json(const HandModel& h) {
  return {{"origin", core::to_json(h.origin)},
          {"pitch_gain", h.pitch_gain},
          {"pitch_bias", h.pitch_bias},
          {"yaw_bias", h.yaw_bias}};
}

HandModel hand_from_json(const nlohmann::json& j) {
  HandModel h;
  h.origin = core::vec3_from_json(j.at("origin"));
  h.pitch_gain = j.at("pitch_gain").get<double>();
  h.pitch_bias = j.at("pitch_bias").get<double>();
  h.yaw_bias = j.at("yaw_bias").get<double>();
  return h;
}

}  // namespace mmref::sim
