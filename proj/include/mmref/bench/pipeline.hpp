#pragma once

// simulate -> calibrate -> train-priors -> eval -> report in one call, with
// the same file layout the individual subcommands produce.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "mmref/bench/calibrate.hpp"
#include "mmref/bench/config.hpp"
#include "mmref/bench/evaluate.hpp"
#include "mmref/bench/train_priors.hpp"
#include "mmref/sim/dataset_gen.hpp"

namespace mmref::bench {

/// Seed of the EM fits, derived from the master seed.
std::uint64_t training_seed(std::uint64_t master);

struct PipelineResult {
  sim::Dataset dataset;
  std::optional<CalibrationSet> calibration;  // absent with ground-truth maps
  PriorSet priors;
  EvalReport report;
  std::vector<RequestOutcome> outcomes;
};

/// With `out_dir` every intermediate artifact is written below it:
/// data/, calibration.json, priors/, report.json, report.md, report.csv.
PipelineResult run_pipeline(const BenchConfig& config, std::uint64_t seed,
                            const std::optional<std::filesystem::path>& out_dir = std::nullopt);

}  // namespace mmref::bench
