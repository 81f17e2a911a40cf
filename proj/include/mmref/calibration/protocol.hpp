#pragma once

// The dwell-point calibration protocol: each known table point is shown for
// a fixed interval and only frames after the initial settling period are
// used as regression samples.

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmref/calibration/svr.hpp"
#include "mmref/core/types.hpp"

namespace mmref::calibration {

/// Which sensor stream of a frame feeds the regressor.
enum class InputChannel { head, left, right };

struct ScheduleEntry {
  Vec2 point = Vec2::Zero();
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
};

inline constexpr std::int64_t kSettleMs = 700;

/// One sample per frame with timestamp in [start_ms + settle_ms, end_ms);
/// frames lacking the channel (no hand in range) are skipped. Throws
/// std::runtime_error naming the point when a scheduled point yields no
/// samples.
std::vector<CalibrationSample> extract_calibration_samples(std::span<const core::ObservationFrame> frames,
                                                           std::span<const ScheduleEntry> schedule,
                                                           InputChannel channel = InputChannel::head,
                                                           std::int64_t settle_ms = kSettleMs);

struct CalibrationError {
  double mean_error_m = 0.0;
  double std_error_m = 0.0;
};

/// Mean and sample standard deviation of the Euclidean prediction error.
template <typename Mapping>
CalibrationError evaluate_calibration(const Mapping& predict_fn, std::span<const CalibrationSample> heldout);

CalibrationError evaluate_calibration(const RbfSvrModel& model, std::span<const CalibrationSample> heldout);

nlohmann::json schedule_to_json(std::span<const ScheduleEntry> schedule);
std::vector<ScheduleEntry> schedule_from_json(const nlohmann::json& j);

// --- implementation ---------------------------------------------------------

CalibrationError summarize_errors(std::span<const double> errors);

template <typename Mapping>
CalibrationError evaluate_calibration(const Mapping& predict_fn, std::span<const CalibrationSample> heldout) {
  std::vector<double> errors;
  errors.reserve(heldout.size());
  for (const auto& s : heldout) errors.push_back((predict_fn(s.input) - s.target).norm());
  return summarize_errors(errors);
}

}  // namespace mmref::calibration
