#pragma once

// Held-out evaluation of the filter variants. Each participant is replayed
// with the prior of the fold that excluded them; the adaptive variant MAP-
// adapts that prior after every resolved request.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmref/bench/config.hpp"
#include "mmref/bench/train_priors.hpp"
#include "mmref/core/types.hpp"
#include "mmref/filter/engine.hpp"
#include "mmref/observation/likelihood.hpp"

namespace mmref::bench {

struct ParticipantRow {
  int participant_id = 0;
  int n_requests = 0;
  double accuracy_pct = 0.0;
  double mean_time_s = 0.0;
  double mean_attempts = 0.0;
};

struct VariantSummary {
  Variant variant = Variant::bf;
  double mean_time_s = 0.0;
  double std_time_s = 0.0;       // across participants
  double accuracy_pct = 0.0;
  double std_accuracy_pct = 0.0; // across participants
  double mean_attempts = 0.0;
  std::vector<ParticipantRow> participants;
};

/// Paired comparison over participants, delta = candidate - baseline.
struct PairedTest {
  Variant baseline = Variant::bf;
  Variant candidate = Variant::bf_tp;
  std::string metric;       // "accuracy_pct" or "mean_time_s"
  std::string alternative;  // "greater" or "less": the direction of improvement
  int n = 0;
  double mean_delta = 0.0;
  double sd_delta = 0.0;
  std::optional<double> t;  // undefined when every delta is identical
  double p_one_tailed = 0.5;
};

struct ModeReport {
  filter::FilterMode mode = filter::FilterMode::first_attempt;
  std::vector<VariantSummary> variants;  // configuration order
  std::vector<PairedTest> tests;

  const VariantSummary* find(Variant v) const;
};

struct EvalReport {
  std::uint64_t seed = 0;
  nlohmann::json config;
  std::vector<ModeReport> modes;
  double max_normalization_error = 0.0;
  long total_steps = 0;
  nlohmann::json timing_patterns = nlohmann::json::array();

  const ModeReport* find(filter::FilterMode m) const;
};

/// Per-request outcome, exposed for tests and the acceptance harness.
struct RequestOutcome {
  int participant_id = 0;
  int request_id = 0;
  Variant variant = Variant::bf;
  filter::FilterMode mode = filter::FilterMode::first_attempt;
  filter::RequestResult result;
};

/// `priors` may be null only when no variant needs a temporal prior. Throws
/// std::invalid_argument naming a participant without a fold model.
EvalReport evaluate(const std::vector<core::Session>& sessions, const std::map<int, observation::SensorMaps>& maps,
                    const PriorSet* priors, const EvalSettings& settings, std::uint64_t seed,
                    const nlohmann::json& config_echo, std::vector<RequestOutcome>* outcomes = nullptr);

/// Student t test on paired deltas; exposed for tests.
PairedTest paired_test(const std::vector<double>& baseline, const std::vector<double>& candidate, bool greater);

nlohmann::json eval_report_to_json(const EvalReport& r);
EvalReport eval_report_from_json(const nlohmann::json& j);
void save_report(const EvalReport& r, const std::filesystem::path& path);
EvalReport load_report(const std::filesystem::path& path);

}  // namespace mmref::bench
