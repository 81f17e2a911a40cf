// mmref: simulate, calibrate, train-priors, eval, report, pipeline.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mmref/bench/calibrate.hpp"
#include "mmref/bench/config.hpp"
#include "mmref/bench/evaluate.hpp"
#include "mmref/bench/pipeline.hpp"
#include "mmref/bench/report.hpp"
#include "mmref/bench/train_priors.hpp"
#include "mmref/core/dataset_io.hpp"
#include "mmref/sim/dataset_gen.hpp"

namespace fs = std::filesystem;
using namespace mmref;
using nlohmann::json;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> participants, requests;
  std::string mode;
  std::string variants;
};

bench::BenchConfig load(const Common& c) {
  bench::BenchConfig cfg = c.config.empty() ? bench::BenchConfig{} : bench::load_config(c.config);
  if (c.participants) cfg.scenario.n_participants = *c.participants;
  if (c.requests) cfg.scenario.requests_per_participant = *c.requests;
  cfg.scenario.check();
  if (!c.mode.empty()) {
    cfg.eval.modes.clear();
    if (c.mode == "first" || c.mode == "both") cfg.eval.modes.push_back(filter::FilterMode::first_attempt);
    if (c.mode == "multi" || c.mode == "both") cfg.eval.modes.push_back(filter::FilterMode::multi_attempt);
    if (cfg.eval.modes.empty()) throw std::invalid_argument("--mode must be first, multi or both");
  }
  if (!c.variants.empty()) cfg.eval.variants = bench::parse_variant_list(c.variants);
  return cfg;
}

// The dataset's master seed unless overridden.
std::uint64_t seed_for(const Common& c, const fs::path& data) {
  if (c.seed) return *c.seed;
  std::ifstream in(data / "manifest.json");
  if (!in) throw std::runtime_error("no --seed given and no manifest at " + (data / "manifest.json").string());
  return json::parse(in).at("seed").get<std::uint64_t>();
}

std::map<int, observation::SensorMaps> maps_for(const bench::BenchConfig& cfg, const std::vector<core::Session>& sessions,
                                                const std::string& calibration_path,
                                                std::optional<bench::CalibrationSet>& holder) {
  if (!cfg.calibration.ground_truth) {
    if (calibration_path.empty())
      throw std::invalid_argument("--calibration is required unless calibration.ground_truth is set");
    holder = bench::load_calibration_set(calibration_path);
  }
  return bench::resolve_maps(sessions, holder ? &*holder : nullptr, cfg.calibration.ground_truth);
}

void add_config(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON configuration file")->check(CLI::ExistingFile);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multimodal referring-expression filter: simulation, calibration, training and evaluation"};
  app.require_subcommand(1);

  Common common;
  std::string out, data, calibration_path, priors_dir, in;
  std::string format = "md";

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic study");
  add_config(simulate, common);
  simulate->add_option("--seed", common.seed, "Master seed");
  simulate->add_option("--participants", common.participants, "Override the participant count");
  simulate->add_option("--requests", common.requests, "Override requests per participant");
  simulate->add_option("--out", out, "Output directory")->required();

  auto* calibrate = app.add_subcommand("calibrate", "Fit the per-participant sensor maps");
  add_config(calibrate, common);
  calibrate->add_option("--data", data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  calibrate->add_option("--out", out, "Output calibration file")->required();

  auto* train = app.add_subcommand("train-priors", "Leave-one-participant-out timing densities");
  add_config(train, common);
  train->add_option("--seed", common.seed, "Master seed (default: the dataset's)");
  train->add_option("--data", data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  train->add_option("--calibration", calibration_path, "Calibration file");
  train->add_option("--out", out, "Output directory")->required();

  auto* eval = app.add_subcommand("eval", "Evaluate the filter variants");
  add_config(eval, common);
  eval->add_option("--seed", common.seed, "Master seed recorded in the report (default: the dataset's)");
  eval->add_option("--data", data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--calibration", calibration_path, "Calibration file");
  eval->add_option("--priors", priors_dir, "Directory written by train-priors");
  eval->add_option("--mode", common.mode, "first, multi or both")->check(CLI::IsMember({"first", "multi", "both"}));
  eval->add_option("--variants", common.variants, "Comma separated: bf,bf-tp,bf-tp-oa");
  eval->add_option("--out", out, "Output report (JSON)")->required();

  auto* report = app.add_subcommand("report", "Render a report as Markdown or CSV");
  report->add_option("--in", in, "Report JSON")->required();
  report->add_option("--format", format, "md or csv")->check(CLI::IsMember({"md", "markdown", "csv"}));
  report->add_option("--out", out, "Output file (default: stdout)");

  auto* pipeline = app.add_subcommand("pipeline", "Run every stage and write all artifacts");
  add_config(pipeline, common);
  pipeline->add_option("--seed", common.seed, "Master seed");
  pipeline->add_option("--participants", common.participants, "Override the participant count");
  pipeline->add_option("--requests", common.requests, "Override requests per participant");
  pipeline->add_option("--mode", common.mode, "first, multi or both")->check(CLI::IsMember({"first", "multi", "both"}));
  pipeline->add_option("--variants", common.variants, "Comma separated: bf,bf-tp,bf-tp-oa");
  pipeline->add_option("--out", out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      const auto cfg = load(common);
      const auto dataset = sim::generate_dataset(cfg.scenario, common.seed.value_or(1));
      const json manifest = sim::write_dataset(dataset, out);
      std::cout << "wrote " << manifest.at("n_sessions") << " sessions, " << manifest.at("n_requests")
                << " requests, " << manifest.at("n_frames") << " frames to " << out << "\n";
    } else if (calibrate->parsed()) {
      const auto cfg = load(common);
      const auto sessions = core::load_sessions(fs::path(data) / "dataset.jsonl");
      const auto recordings = sim::load_calibration(fs::path(data) / "calibration.jsonl");
      const auto set = bench::calibrate_all(recordings, bench::profiles_from_sessions(sessions), cfg.calibration.svr);
      bench::save_calibration(set, out);
      std::cout << bench::calibration_summary(set).dump(2) << "\n";
    } else if (train->parsed()) {
      const auto cfg = load(common);
      const auto sessions = core::load_sessions(fs::path(data) / "dataset.jsonl");
      std::optional<bench::CalibrationSet> holder;
      const auto maps = maps_for(cfg, sessions, calibration_path, holder);
      const auto samples = bench::collect_samples(sessions, maps, observation::KeywordLexicon::standard(), cfg.train.samples);
      const auto set = bench::train_lopo(samples, cfg.train, bench::training_seed(seed_for(common, data)));
      bench::save_priors(set, out);
      std::cout << "wrote " << set.folds.size() << " fold models to " << out << "\n";
    } else if (eval->parsed()) {
      const auto cfg = load(common);
      const auto sessions = core::load_sessions(fs::path(data) / "dataset.jsonl");
      std::optional<bench::CalibrationSet> holder;
      const auto maps = maps_for(cfg, sessions, calibration_path, holder);
      std::optional<bench::PriorSet> priors;
      if (!priors_dir.empty()) priors = bench::load_priors(priors_dir);
      const auto r = bench::evaluate(sessions, maps, priors ? &*priors : nullptr, cfg.eval, seed_for(common, data),
                                     bench::config_to_json(cfg));
      bench::save_report(r, out);
      std::cout << bench::render_markdown(r);
    } else if (report->parsed()) {
      const auto r = bench::load_report(in);
      const std::string text = bench::render(r, *bench::parse_report_format(format));
      if (out.empty()) {
        std::cout << text;
      } else {
        std::ofstream f(out, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open " + out + " for writing");
        f << text;
      }
    } else if (pipeline->parsed()) {
      const auto cfg = load(common);
      const auto result = bench::run_pipeline(cfg, common.seed.value_or(1), fs::path(out));
      std::cout << bench::render_markdown(result.report);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
