#pragma once

// Renders one fetching request as a 60 Hz frame stream: a spoken request
// built from behaviour-pattern clauses, intentional fixations and pointing
// timed by the participant's personal offsets, and accidental fixations on
// other objects.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmref/core/types.hpp"
#include "mmref/sim/profile.hpp"
#include "mmref/temporal/events.hpp"

namespace mmref::sim {

struct RequestGenConfig {
  double frame_rate_hz = 60.0;
  std::array<double, 3> pattern_mix{0.34, 0.33, 0.33};  // P1, P2, P3
  double word_revision_rate = 0.05;
  std::array<double, 2> onset_s{0.8, 2.0};
  std::array<double, 2> trailing_s{2.0, 5.0};
  std::array<double, 2> intentional_fixation_s{0.5, 1.0};
  std::array<double, 2> accidental_fixation_s{0.1, 0.3};
  std::array<double, 2> pointing_s{0.8, 1.5};
  int max_clauses = 2;

  void check() const;
};

nlohmann::json request_gen_to_json(const RequestGenConfig& c);
RequestGenConfig request_gen_from_json(const nlohmann::json& j);

/// What the simulator injected, for checking extraction and labelling.
struct GroundTruthEvent {
  temporal::Modality modality = temporal::Modality::head;
  std::int64_t onset_ms = 0;
  std::int64_t end_ms = 0;  // spatial events only
  std::optional<int> object_id;
  bool intentional = false;
  std::optional<Pattern> pattern;
  std::string word;  // speech only
};

nlohmann::json ground_truth_event_to_json(const GroundTruthEvent& e);

struct GeneratedRequest {
  core::Request request;
  std::vector<Pattern> patterns;
  std::vector<GroundTruthEvent> events;
};

/// Timestamp of frame k at `rate_hz`, truncated to whole milliseconds.
std::int64_t frame_time_ms(long k, double rate_hz);

/// Deterministic in (profile, scene, target, seed). Throws
/// std::invalid_argument when the target is not in the scene.
GeneratedRequest generate_request(const ParticipantProfile& profile, const core::Scene& scene, int target_id,
                                  int request_id, const RequestGenConfig& cfg, std::uint64_t seed);

}  // namespace mmref::sim
