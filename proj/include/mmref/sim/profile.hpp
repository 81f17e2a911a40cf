#pragma once

// Synthetic participants: personal timing of the three behaviour patterns,
// noise levels and sensor geometry, drawn from population hyper-priors.

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

#include <nlohmann/json.hpp>

#include "mmref/sim/geometry.hpp"
#include "mmref/temporal/gmm.hpp"

namespace mmref::sim {

/// P1: fixation shortly before the request starts. P2: deictic word with
/// co-timed fixation and pointing. P3: attribute word with co-timed fixation.
enum class Pattern { p1, p2, p3 };

std::string_view to_string(Pattern p);

/// Offsets are T_speech - T_event in seconds for (head, left, right); the
/// hand axes of a pattern apply to whichever hand points.
struct PatternTiming {
  temporal::Vec3 mean = temporal::Vec3::Zero();
  temporal::Mat3 cov = temporal::Mat3::Identity() * 0.0064;
};

struct PopulationConfig {
  double p1_head_mean_s = 0.4;
  double p2_head_mean_s = 0.0;
  double p2_hand_mean_s = 0.05;
  double p3_head_mean_s = 0.0;
  double between_sd_s = 0.05;  // spread of personal means around the population
  double within_sd_s = 0.08;   // personal trial-to-trial spread
  std::array<double, 2> accidental_rate_hz{1.5, 2.5};
  std::array<double, 2> fixation_noise_m{0.005, 0.015};
  std::array<double, 2> pointing_usage{0.6, 1.0};
  std::array<double, 2> speech_rate_wps{2.0, 3.0};
  double right_handed_prob = 0.85;
  double gain_sd = 0.05;
  double bias_sd_rad = 0.03;
  double eye_jitter_m = 0.02;
};

nlohmann::json population_to_json(const PopulationConfig& p);
/// Throws std::invalid_argument naming an unknown key.
PopulationConfig population_from_json(const nlohmann::json& j);

struct ParticipantProfile {
  int participant_id = 0;
  std::uint64_t seed = 0;
  std::array<PatternTiming, 3> pattern_offsets_s;
  double accidental_rate_hz = 0.5;
  double fixation_spatial_noise_m = 0.01;
  double pointing_usage_prob = 0.8;
  double speech_rate_wps = 2.5;
  bool right_handed = true;
  GazeModel gaze;
  HandModel left_hand{{-0.2, -0.5, 0.2}};
  HandModel right_hand{{0.2, -0.5, 0.2}};

  const PatternTiming& timing(Pattern p) const { return pattern_offsets_s[static_cast<int>(p)]; }
  void check() const;
};

/// `timing_shift_s` is added to every personal offset mean.
ParticipantProfile draw_profile(const PopulationConfig& pop, int participant_id, std::uint64_t seed,
                                double timing_shift_s = 0.0, bool noise_free = false);

nlohmann::json profile_to_json(const ParticipantProfile& p);
ParticipantProfile profile_from_json(const nlohmann::json& j);

}  // namespace mmref::sim
