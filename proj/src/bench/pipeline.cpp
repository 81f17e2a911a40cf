#include "mmref/bench/pipeline.hpp"

#include <fstream>

#include "mmref/bench/report.hpp"

namespace mmref::bench {

std::uint64_t training_seed(std::uint64_t master) { return sim::derive_seed(master, 200, 0); }

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
}

}  // namespace

PipelineResult run_pipeline(const BenchConfig& config, std::uint64_t seed,
                            const std::optional<std::filesystem::path>& out_dir) {
  PipelineResult out;
  out.dataset = sim::generate_dataset(config.scenario, seed);
  if (out_dir) sim::write_dataset(out.dataset, *out_dir / "data");

  const auto& sessions = out.dataset.sessions;
  if (!config.calibration.ground_truth) {
    out.calibration = calibrate_all(out.dataset.calibration, profiles_from_sessions(sessions), config.calibration.svr);
    if (out_dir) save_calibration(*out.calibration, *out_dir / "calibration.json");
  }
  const auto maps = resolve_maps(sessions, out.calibration ? &*out.calibration : nullptr, config.calibration.ground_truth);

  const auto samples = collect_samples(sessions, maps, observation::KeywordLexicon::standard(), config.train.samples);
  out.priors = train_lopo(samples, config.train, training_seed(seed));
  if (out_dir) save_priors(out.priors, *out_dir / "priors");

  out.report = evaluate(sessions, maps, &out.priors, config.eval, seed, config_to_json(config), &out.outcomes);
  if (out_dir) {
    save_report(out.report, *out_dir / "report.json");
    write_text(*out_dir / "report.md", render_markdown(out.report));
    write_text(*out_dir / "report.csv", render_csv(out.report));
  }
  return out;
}

}  // namespace mmref::bench
