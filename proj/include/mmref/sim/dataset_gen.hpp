#pragma once

// Whole synthetic studies: participants, their scenes and requests, and the
// calibration recordings, all derived from one master seed.

#include <cstdint>
#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmref/calibration/protocol.hpp"
#include "mmref/core/types.hpp"
#include "mmref/observation/likelihood.hpp"
#include "mmref/sim/profile.hpp"
#include "mmref/sim/request_gen.hpp"
#include "mmref/sim/scene_gen.hpp"

namespace mmref::sim {

struct ScenarioConfig {
  int n_participants = 30;
  int requests_per_participant = 20;
  SceneConfig scene;
  RequestGenConfig requests;
  PopulationConfig population;
  double timing_shift_s = 0.0;       // added to every participant's pattern offsets
  bool noise_free = false;           // no accidental fixations, spatial or recognizer noise
  double calibration_noise_m = 0.01; // per-frame gaze jitter during calibration

  void check() const;
};

nlohmann::json scenario_to_json(const ScenarioConfig& c);
/// Throws std::invalid_argument naming the first unknown key.
ScenarioConfig scenario_from_json(const nlohmann::json& j);

/// Independent stream for (stream, index) under a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index);

struct CalibrationRecording {
  int participant_id = 0;
  std::vector<calibration::ScheduleEntry> schedule;
  std::vector<core::ObservationFrame> frames;
  std::vector<calibration::ScheduleEntry> heldout_schedule;
  std::vector<core::ObservationFrame> heldout_frames;
};

nlohmann::json calibration_recording_to_json(const CalibrationRecording& r);
CalibrationRecording calibration_recording_from_json(const nlohmann::json& j);

/// The 14 calibration targets: a 5 x 3 grid without its centre.
std::vector<Vec2> calibration_points();
/// Held-out targets between the calibration grid points.
std::vector<Vec2> heldout_points();

inline constexpr std::int64_t kDwellMs = 1950;

/// Dwell-point recording with every channel active. The first 300 ms of a
/// dwell sweep from the previous point; afterwards gaze and fingers rest on
/// the point with Gaussian jitter of sd `noise_m` per table axis.
std::pair<std::vector<calibration::ScheduleEntry>, std::vector<core::ObservationFrame>> record_calibration(
    const ParticipantProfile& profile, const std::vector<Vec2>& points, double noise_m, double rate_hz,
    std::uint64_t seed);

/// The simulator's true pose-to-table maps for a participant.
observation::SensorMaps ground_truth_maps(const ParticipantProfile& profile);

struct RequestTruth {
  int participant_id = 0;
  int request_id = 0;
  int target_id = 0;
  std::vector<Pattern> patterns;
  std::vector<GroundTruthEvent> events;
};

nlohmann::json request_truth_to_json(const RequestTruth& t);

struct Dataset {
  std::uint64_t seed = 0;
  ScenarioConfig config;
  std::vector<ParticipantProfile> profiles;
  std::vector<core::Session> sessions;
  std::vector<RequestTruth> truth;
  std::vector<CalibrationRecording> calibration;
};

Dataset generate_dataset(const ScenarioConfig& cfg, std::uint64_t seed);

nlohmann::json dataset_manifest(const Dataset& d);

/// Writes dataset.jsonl, ground_truth.jsonl, calibration.jsonl and
/// manifest.json into `dir` (created if needed). Returns the manifest.
nlohmann::json write_dataset(const Dataset& d, const std::filesystem::path& dir);

std::vector<CalibrationRecording> load_calibration(const std::filesystem::path& path);

}  // namespace mmref::sim
