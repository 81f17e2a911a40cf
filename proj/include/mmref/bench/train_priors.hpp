#pragma once

// Leave-one-participant-out training of the intentional/accidental timing
// densities. Every sample carries the participant it came from so fold
// hygiene can be checked after the fact.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmref/bench/config.hpp"
#include "mmref/core/types.hpp"
#include "mmref/observation/lexicon.hpp"
#include "mmref/observation/likelihood.hpp"
#include "mmref/temporal/events.hpp"
#include "mmref/temporal/gating.hpp"

namespace mmref::bench {

/// Labelled samples of one request, tagged with participant and request id.
std::vector<temporal::DeltaSample> request_samples(const core::Request& request, const core::Scene& scene,
                                                   const observation::SensorMaps& maps,
                                                   const observation::KeywordLexicon& lexicon, SampleMode mode,
                                                   int participant_id);

/// Samples of every participant, keyed by participant id.
std::map<int, std::vector<temporal::DeltaSample>> collect_samples(
    const std::vector<core::Session>& sessions, const std::map<int, observation::SensorMaps>& maps,
    const observation::KeywordLexicon& lexicon, SampleMode mode);

struct PriorFit {
  temporal::TemporalPrior prior;
  std::size_t n_intentional = 0;
  std::size_t n_accidental = 0;
  int k_intentional = 0;
  int k_accidental = 0;  // 0 when there were too few accidental samples
  std::vector<temporal::BicRow> bic_intentional;
  std::vector<temporal::BicRow> bic_accidental;
};

/// BIC over the configured K range, restricted to K with 4K <= n. Throws
/// std::invalid_argument with the counts when fewer than 4 intentional
/// samples exist. Too few accidental samples leave the accidental density
/// out, which makes the gate pass everything.
PriorFit fit_temporal_prior(std::span<const temporal::DeltaSample> samples, const TrainSettings& settings,
                            std::uint64_t seed_intentional, std::uint64_t seed_accidental);

struct FoldPrior {
  int held_out = 0;
  std::vector<int> training_participants;
  PriorFit fit;
};

struct PriorSet {
  std::uint64_t seed = 0;
  SampleMode samples = SampleMode::event;
  std::vector<FoldPrior> folds;
  std::optional<PriorFit> pooled;  // all participants; for pattern analysis only

  const FoldPrior* fold_for(int participant_id) const;
};

/// One fold per participant. Throws std::invalid_argument for fewer than two
/// participants and std::logic_error if a held-out sample leaks into its fold.
PriorSet train_lopo(const std::map<int, std::vector<temporal::DeltaSample>>& samples, const TrainSettings& settings,
                    std::uint64_t seed);

nlohmann::json prior_fit_to_json(const PriorFit& f);
PriorFit prior_fit_from_json(const nlohmann::json& j);

/// Writes fold_<id>.json per fold, pooled.json and manifest.json (seed, K and
/// BIC tables per fold). Returns the manifest.
nlohmann::json save_priors(const PriorSet& set, const std::filesystem::path& dir);
PriorSet load_priors(const std::filesystem::path& dir);

}  // namespace mmref::bench
