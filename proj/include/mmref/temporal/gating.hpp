#pragma once

// Turns the intentional/accidental timing densities into per-modality
// evidence weights and applies them to the spatial likelihoods.

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmref/observation/likelihood.hpp"
#include "mmref/temporal/events.hpp"
#include "mmref/temporal/gmm.hpp"

namespace mmref::temporal {

/// The pair of timing densities plus the class prior. Without an accidental
/// model (no accidental training samples) the gate always passes evidence.
struct TemporalPrior {
  Gmm intentional;
  std::optional<Gmm> accidental;
  double prior_intentional = 1.0;

  void check() const;
};

nlohmann::json temporal_prior_to_json(const TemporalPrior& p);
TemporalPrior temporal_prior_from_json(const nlohmann::json& j);

enum class GatingStrategy { none, gated, literal };

std::string_view to_string(GatingStrategy s);
std::optional<GatingStrategy> parse_gating_strategy(std::string_view s);

struct GatingConfig {
  GatingStrategy strategy = GatingStrategy::gated;
  std::int64_t hold_ms = 500;
};

/// pi_I pdf_I / (pi_I pdf_I + pi_A pdf_A) from log densities; falls back to
/// pi_I when both densities underflow.
double gating_weight(double log_pdf_intentional, double log_pdf_accidental, double prior_intentional);

/// Posterior that `delta` is intentional, marginalizing absent axes.
double gating_weight(const DeltaSample& delta, const Gmm& g_intent, const Gmm& g_accident, double prior_intentional);
double gating_weight(const DeltaSample& delta, const TemporalPrior& prior);

using ModalityWeights = std::array<double, 3>;  // head, left, right

struct WeightedEvidence {
  observation::Likelihood head, left, right;
  double scale = 1.0;  // multiplies the combined likelihood (literal strategy)
};

/// gated: v <- v^w elementwise (w = 1 leaves v as is, w = 0 gives ones).
/// literal: vectors untouched, `scale` set to `literal_density`.
/// none: everything untouched.
WeightedEvidence apply_temporal_prior(observation::Likelihood head, observation::Likelihood left,
                                      observation::Likelihood right, const ModalityWeights& w,
                                      GatingStrategy strategy, double literal_density = 1.0);

/// Streaming gate for one request. Events are fed in time order as they are
/// observed. Whenever an event arrives, the latest event of every spatial
/// modality is re-weighted against the nearest anchor seen so far; the weight
/// is held for hold_ms, after which (and before any anchor) the modality
/// falls back to the class prior.
class OnlineGate {
 public:
  OnlineGate(TemporalPrior prior, GatingConfig cfg);

  void observe(const EventRecord& e);
  ModalityWeights weights_at(std::int64_t now_ms) const;
  /// Intentional density of the most recent delta, for the literal strategy.
  double literal_density() const { return literal_density_; }

 private:
  struct Held {
    double weight = 0.0;
    std::int64_t until_ms = std::numeric_limits<std::int64_t>::min();
  };

  void refresh(std::int64_t now_ms);

  TemporalPrior prior_;
  GatingConfig cfg_;
  std::array<std::vector<std::int64_t>, 3> spatial_times_;
  std::vector<std::int64_t> anchors_;
  std::array<Held, 3> held_;
  double literal_density_ = 1.0;
};

}  // namespace mmref::temporal
