#pragma once

// Replays a request frame by frame through the filter and applies the
// decision policy (voluntary threshold crossing, forced decision at the end,
// optional multi-attempt exclusion loop).

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmref/core/types.hpp"
#include "mmref/filter/belief_ops.hpp"
#include "mmref/observation/lexicon.hpp"
#include "mmref/observation/likelihood.hpp"
#include "mmref/temporal/gating.hpp"

namespace mmref::filter {

enum class FilterMode { first_attempt, multi_attempt };

std::string_view to_string(FilterMode m);
std::optional<FilterMode> parse_filter_mode(std::string_view s);

struct FilterConfig {
  double c = 0.95;
  double threshold = 0.85;
  FilterMode mode = FilterMode::first_attempt;

  void check() const;
};

nlohmann::json filter_config_to_json(const FilterConfig& c);
/// Throws std::invalid_argument naming an unknown key.
FilterConfig filter_config_from_json(const nlohmann::json& j);

struct EngineModels {
  observation::SensorMaps maps;
  observation::LikelihoodParams params;
  observation::KeywordLexicon lexicon = observation::KeywordLexicon::standard();
};

/// Table points of the spatial channels that are active in a frame.
struct FrameProjection {
  std::optional<core::Vec2> head, left, right;
};

/// Projects only the flagged channels; the result can be reused by every
/// model variant evaluated on the same request.
std::vector<FrameProjection> project_request(const core::Request& request, const observation::SensorMaps& maps);

/// Temporal weighting for a run; `prior == nullptr` means plain filtering.
struct TemporalSetup {
  const temporal::TemporalPrior* prior = nullptr;
  temporal::GatingConfig gating;
};

struct Guess {
  int object_id = 0;
  double time_s = 0.0;
  bool voluntary = false;
};

struct RequestResult {
  std::vector<Guess> guesses;
  bool correct = false;
  double decision_time_s = 0.0;
  int attempts = 0;
  double max_normalization_error = 0.0;
  long steps = 0;
};

nlohmann::json request_result_to_json(const RequestResult& r);

/// Evidence for one frame before it is folded into the belief.
struct FrameEvidence {
  observation::Likelihood head, left, right, speech;
  temporal::ModalityWeights weights{1.0, 1.0, 1.0};
  temporal::GatingStrategy strategy = temporal::GatingStrategy::none;
  double literal_density = 1.0;
};

/// Time update followed by the (optionally gated) observation update.
Belief step(const Belief& belief, const FrameEvidence& evidence, double c);

/// Incremental filter over one request. Exposed so callers can observe the
/// belief after every frame.
class FilterSession {
 public:
  FilterSession(const core::Scene& scene, const EngineModels& models, const FilterConfig& config,
                const TemporalSetup& temporal);

  const Belief& belief() const { return belief_; }
  const Belief& advance(const core::ObservationFrame& frame, const FrameProjection& projection);
  void exclude(std::size_t index) { belief_ = belief_.excluding(index); }
  /// Evidence assembled for the most recent frame.
  const FrameEvidence& last_evidence() const { return evidence_; }

 private:
  const core::Scene& scene_;
  const EngineModels& models_;
  FilterConfig config_;
  TemporalSetup temporal_;
  std::optional<temporal::OnlineGate> gate_;
  Belief belief_;
  FrameEvidence evidence_;
  std::array<bool, 3> previous_active_{false, false, false};
  std::string previous_speech_;
};

/// Throws std::invalid_argument for a request without frames.
RequestResult run_request(const core::Request& request, const core::Scene& scene, const EngineModels& models,
                          const FilterConfig& config, const TemporalSetup& temporal = {});

/// As run_request with projections computed by the caller.
RequestResult run_projected(const core::Request& request, const core::Scene& scene,
                            const std::vector<FrameProjection>& projections, const EngineModels& models,
                            const FilterConfig& config, const TemporalSetup& temporal = {});

}  // namespace mmref::filter
