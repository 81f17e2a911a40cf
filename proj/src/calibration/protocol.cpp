#include "mmref/calibration/protocol.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "mmref/core/dataset_io.hpp"

namespace mmref::calibration {

std::vector<CalibrationSample> extract_calibration_samples(std::span<const core::ObservationFrame> frames,
                                                           std::span<const ScheduleEntry> schedule,
                                                           InputChannel channel, std::int64_t settle_ms) {
  std::vector<CalibrationSample> out;
  for (std::size_t p = 0; p < schedule.size(); ++p) {
    const ScheduleEntry& e = schedule[p];
    const std::int64_t from = e.start_ms + settle_ms;
    std::size_t kept = 0;
    for (const auto& f : frames) {
      if (f.timestamp_ms < from || f.timestamp_ms >= e.end_ms) continue;
      std::optional<Vec3> input;
      switch (channel) {
        case InputChannel::head: input = f.head; break;
        case InputChannel::left: input = f.left_dir; break;
        case InputChannel::right: input = f.right_dir; break;
      }
      if (!input) continue;
      out.push_back({*input, e.point});
      ++kept;
    }
    if (kept == 0) {
      throw std::runtime_error("calibration point " + std::to_string(p) + " at (" + std::to_string(e.point.x()) +
                               ", " + std::to_string(e.point.y()) + ") has no samples after the settling period");
    }
  }
  return out;
}

CalibrationError summarize_errors(std::span<const double> errors) {
  if (errors.empty()) throw std::invalid_argument("calibration evaluation needs held-out samples");
  double sum = 0.0;
  for (double e : errors) sum += e;
  const double mean = sum / static_cast<double>(errors.size());
  double ss = 0.0;
  for (double e : errors) ss += (e - mean) * (e - mean);
  const double sd = errors.size() > 1 ? std::sqrt(ss / static_cast<double>(errors.size() - 1)) : 0.0;
  return {mean, sd};
}

CalibrationError evaluate_calibration(const RbfSvrModel& model, std::span<const CalibrationSample> heldout) {
  return evaluate_calibration([&](const Vec3& x) { return model.predict(x); }, heldout);
}

nlohmann::json schedule_to_json(std::span<const ScheduleEntry> schedule) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& e : schedule)
    j.push_back({{"point", core::to_json(e.point)}, {"start_ms", e.start_ms}, {"end_ms", e.end_ms}});
  return j;
}

std::vector<ScheduleEntry> schedule_from_json(const nlohmann::json& j) {
  std::vector<ScheduleEntry> out;
  for (const auto& e : j)
    out.push_back({core::vec2_from_json(e.at("point")), e.at("start_ms").get<std::int64_t>(),
                   e.at("end_ms").get<std::int64_t>()});
  return out;
}

}  // namespace mmref::calibration
