#pragma once

// One JSON document configures the whole pipeline. Every section is
// optional; unknown keys anywhere are rejected with the offending key named.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmref/calibration/svr.hpp"
#include "mmref/filter/engine.hpp"
#include "mmref/observation/likelihood.hpp"
#include "mmref/sim/dataset_gen.hpp"
#include "mmref/temporal/gating.hpp"
#include "mmref/temporal/gmm.hpp"
#include "mmref/temporal/map_adapt.hpp"

namespace mmref::bench {

enum class Variant { bf, bf_tp, bf_tp_oa };

std::string_view to_string(Variant v);
std::optional<Variant> parse_variant(std::string_view s);
/// Comma separated list such as "bf,bf-tp". Throws on an unknown name.
std::vector<Variant> parse_variant_list(std::string_view s);

/// Which samples the timing densities are fitted on. `event`: one per spatial
/// event against its nearest anchor (what the gate scores). `anchor`: one per
/// anchor from the nearest spatial events.
enum class SampleMode { event, anchor };

struct CalibrationSettings {
  calibration::SvrHyper svr = [] {
    calibration::SvrHyper h;
    h.epsilon = 0.002;
    return h;
  }();
  bool ground_truth = false;  // skip fitting, use the simulator's true maps
};

struct TrainSettings {
  std::vector<int> k_range{1, 2, 3, 4, 5, 6};
  SampleMode samples = SampleMode::event;
  temporal::EmOptions em;
};

struct EvalSettings {
  filter::FilterConfig filter = [] {
    filter::FilterConfig f;
    f.c = 0.995;
    return f;
  }();
  observation::LikelihoodParams likelihood = [] {
    observation::LikelihoodParams p;
    p.sigma_head = {0.5, 0.5};
    p.sigma_left = p.sigma_right = {0.3, 0.3};
    return p;
  }();
  temporal::GatingConfig gating;
  temporal::AdaptationConfig adaptation;
  std::vector<Variant> variants{Variant::bf, Variant::bf_tp, Variant::bf_tp_oa};
  std::vector<filter::FilterMode> modes{filter::FilterMode::first_attempt, filter::FilterMode::multi_attempt};
};

struct BenchConfig {
  sim::ScenarioConfig scenario;
  CalibrationSettings calibration;
  TrainSettings train;
  EvalSettings eval;
};

nlohmann::json config_to_json(const BenchConfig& c);
/// Throws std::invalid_argument naming the first unknown or malformed key.
BenchConfig config_from_json(const nlohmann::json& j);
BenchConfig load_config(const std::filesystem::path& path);

}  // namespace mmref::bench
