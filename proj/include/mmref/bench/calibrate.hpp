#pragma once

// Per-participant calibration of the three spatial channels from the
// dwell-point recordings, with held-out error and the naive head-ray
// baseline for comparison.

#include <array>
#include <filesystem>
#include <map>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmref/calibration/protocol.hpp"
#include "mmref/calibration/svr.hpp"
#include "mmref/core/types.hpp"
#include "mmref/observation/likelihood.hpp"
#include "mmref/sim/dataset_gen.hpp"
#include "mmref/sim/profile.hpp"

namespace mmref::bench {

struct ChannelCalibration {
  calibration::RbfSvrModel model;
  calibration::CalibrationError heldout;
  std::size_t n_train = 0;
  std::size_t n_heldout = 0;
};

struct ParticipantCalibration {
  int participant_id = 0;
  std::array<ChannelCalibration, 3> channels;  // head, left, right
  calibration::CalibrationError naive_head;    // ray from the head onto the table
};

struct CalibrationSet {
  calibration::SvrHyper hyper;
  std::vector<ParticipantCalibration> participants;
};

ParticipantCalibration calibrate_participant(const sim::CalibrationRecording& recording,
                                             const sim::ParticipantProfile& profile,
                                             const calibration::SvrHyper& hyper);

/// Recordings and profiles are matched by participant id; a recording without
/// a profile is an error.
CalibrationSet calibrate_all(const std::vector<sim::CalibrationRecording>& recordings,
                             const std::map<int, sim::ParticipantProfile>& profiles,
                             const calibration::SvrHyper& hyper);

nlohmann::json calibration_set_to_json(const CalibrationSet& set);
CalibrationSet calibration_set_from_json(const nlohmann::json& j);
/// Mean held-out errors over participants, per channel and for the baseline.
nlohmann::json calibration_summary(const CalibrationSet& set);

observation::SensorMaps maps_from(const ParticipantCalibration& p);

/// Profiles stored in the session headers of a simulated dataset.
std::map<int, sim::ParticipantProfile> profiles_from_sessions(const std::vector<core::Session>& sessions);

/// Sensor maps per participant: the fitted models, or with `ground_truth` the
/// simulator's own maps (then `set` may be null). Throws when a session's
/// participant has no entry.
std::map<int, observation::SensorMaps> resolve_maps(const std::vector<core::Session>& sessions,
                                                    const CalibrationSet* set, bool ground_truth);

void save_calibration(const CalibrationSet& set, const std::filesystem::path& path);
CalibrationSet load_calibration_set(const std::filesystem::path& path);

}  // namespace mmref::bench
