#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mmref/bench/calibrate.hpp"
#include "mmref/bench/config.hpp"
#include "mmref/bench/evaluate.hpp"
#include "mmref/bench/pipeline.hpp"
#include "mmref/bench/report.hpp"
#include "mmref/bench/train_priors.hpp"

using namespace mmref;
using namespace mmref::bench;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

BenchConfig small_config() {
  BenchConfig c;
  c.scenario.n_participants = 4;
  c.scenario.requests_per_participant = 5;
  return c;
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("mmref_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

temporal::DeltaSample sample_at(int pid, double t, temporal::DeltaLabel label) {
  temporal::DeltaSample s;
  s.dt_head_s = t;
  s.dt_left_s = t + 0.05;
  s.dt_right_s = -t;
  s.present = temporal::kAllAxes;
  s.label = label;
  s.participant_id = pid;
  return s;
}

// Deterministic spread of samples per participant.
std::map<int, std::vector<temporal::DeltaSample>> synthetic_samples(int participants, int per) {
  std::map<int, std::vector<temporal::DeltaSample>> out;
  for (int p = 0; p < participants; ++p)
    for (int i = 0; i < per; ++i) {
      const double u = std::sin(1.7 * i + 0.3 * p);
      out[p].push_back(sample_at(p, 0.1 * u, temporal::DeltaLabel::intentional));
      out[p].push_back(sample_at(p, 1.5 + 0.8 * std::cos(2.3 * i + p), temporal::DeltaLabel::accidental));
    }
  return out;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(MMREF_CLI) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("variant names") {
  for (auto v : {Variant::bf, Variant::bf_tp, Variant::bf_tp_oa}) CHECK(parse_variant(to_string(v)) == v);
  CHECK(parse_variant_list("bf,bf-tp-oa") == std::vector<Variant>{Variant::bf, Variant::bf_tp_oa});
  CHECK_THROWS_AS(parse_variant_list("bf,oa"), std::invalid_argument);
}

TEST_CASE("config round-trip and unknown keys") {
  BenchConfig c = small_config();
  c.eval.filter.c = 0.97;
  c.train.samples = SampleMode::anchor;
  c.calibration.ground_truth = true;
  c.eval.variants = {Variant::bf};
  const auto back = config_from_json(config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));
  CHECK(back.scenario.n_participants == 4);
  CHECK(back.train.samples == SampleMode::anchor);
  CHECK_THROWS_AS(config_from_json({{"train", {{"restarts", 0}}}}), std::invalid_argument);

  for (const json& bad : {json{{"evall", json::object()}}, json{{"eval", {{"gating", {{"hold", 3}}}}}},
                          json{{"train", {{"k", {1, 2}}}}}, json{{"calibration", {{"eps", 0.1}}}}}) {
    try {
      config_from_json(bad);
      FAIL("expected invalid_argument for " << bad.dump());
    } catch (const std::invalid_argument& e) {
      const std::string key = bad.begin().value().is_object() && !bad.begin().value().empty()
                                  ? bad.begin().value().begin().key()
                                  : bad.begin().key();
      CHECK(std::string(e.what()).find(key) != std::string::npos);
    }
  }
}

TEST_CASE("paired t test against a reference value") {
  const std::vector<double> a{70, 65, 80, 75, 60, 90, 85}, b{72, 70, 79, 82, 66, 91, 90};
  const auto g = paired_test(a, b, true);
  REQUIRE(g.t);
  CHECK(*g.t == doctest::Approx(3.2185580656715587).epsilon(1e-12));
  CHECK(g.p_one_tailed == doctest::Approx(0.009085066910145672).epsilon(1e-9));
  CHECK(g.n == 7);
  const auto l = paired_test(a, b, false);
  CHECK(l.p_one_tailed == doctest::Approx(0.9909149330898543).epsilon(1e-9));

  const auto flat = paired_test({1, 2, 3}, {1, 2, 3}, true);
  CHECK_FALSE(flat.t);
  CHECK(flat.p_one_tailed == 0.5);
  CHECK(paired_test({1, 2}, {2, 3}, true).p_one_tailed == 0.0);
  CHECK_THROWS_AS(paired_test({1, 2}, {1}, true), std::invalid_argument);
}

TEST_CASE("LOPO folds never see their held-out participant") {
  const auto samples = synthetic_samples(5, 12);
  const auto set = train_lopo(samples, {}, 3);
  REQUIRE(set.folds.size() == 5);
  for (const auto& f : set.folds) {
    CHECK(std::find(f.training_participants.begin(), f.training_participants.end(), f.held_out) ==
          f.training_participants.end());
    CHECK(f.training_participants.size() == 4);
    CHECK(f.fit.n_intentional == 48);
    CHECK(f.fit.prior.prior_intentional == doctest::Approx(0.5));
  }
  REQUIRE(set.pooled);
  CHECK(set.pooled->n_intentional == 60);
  CHECK(set.fold_for(2)->held_out == 2);
  CHECK(set.fold_for(9) == nullptr);

  auto leaky = samples;
  leaky[1].push_back(sample_at(0, 0.0, temporal::DeltaLabel::intentional));
  CHECK_THROWS_AS(train_lopo(leaky, {}, 3), std::logic_error);
  CHECK_THROWS_AS(train_lopo({{0, samples.at(0)}}, {}, 3), std::invalid_argument);
}

TEST_CASE("prior fitting with too few samples") {
  std::vector<temporal::DeltaSample> few{sample_at(0, 0.0, temporal::DeltaLabel::intentional),
                                         sample_at(0, 0.1, temporal::DeltaLabel::accidental)};
  CHECK_THROWS_AS(fit_temporal_prior(few, {}, 1, 2), std::invalid_argument);
  for (int i = 0; i < 6; ++i) few.push_back(sample_at(0, 0.02 * i, temporal::DeltaLabel::intentional));
  const auto fit = fit_temporal_prior(few, {}, 1, 2);
  CHECK(fit.k_accidental == 0);
  CHECK_FALSE(fit.prior.accidental);
  CHECK(fit.prior.prior_intentional == 1.0);
  CHECK_NOTHROW(fit.prior.check());
}

TEST_CASE("priors survive save and load") {
  const auto set = train_lopo(synthetic_samples(3, 10), {}, 8);
  const auto dir = scratch("priors");
  save_priors(set, dir);
  const auto back = load_priors(dir);
  CHECK(back.seed == 8);
  REQUIRE(back.folds.size() == 3);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(prior_fit_to_json(back.folds[i].fit) == prior_fit_to_json(set.folds[i].fit));
  fs::remove_all(dir);
}

TEST_CASE("small pipeline end to end") {
  const auto dir = scratch("pipeline");
  const auto r = run_pipeline(small_config(), 5, dir);
  for (const char* f : {"data/dataset.jsonl", "calibration.json", "priors/manifest.json", "report.json", "report.md",
                        "report.csv"})
    CHECK(fs::exists(dir / f));
  CHECK(r.report.max_normalization_error < 1e-9);
  REQUIRE(r.report.modes.size() == 2);
  for (const auto& m : r.report.modes) {
    CHECK(m.variants.size() == 3);
    CHECK(m.tests.size() == 6);
    for (const auto& v : m.variants) {
      CHECK(v.participants.size() == 4);
      CHECK(v.accuracy_pct >= 0.0);
      CHECK(v.accuracy_pct <= 100.0);
      if (m.mode == filter::FilterMode::first_attempt) CHECK(v.mean_attempts == 1.0);
    }
  }
  CHECK(r.outcomes.size() == 2 * 3 * 20u);

  const auto loaded = load_report(dir / "report.json");
  CHECK(eval_report_to_json(loaded) == eval_report_to_json(r.report));
  CHECK(render_markdown(loaded) == slurp(dir / "report.md"));

  // CSV: header plus one row per (mode, variant).
  const std::string csv = slurp(dir / "report.csv");
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "mode,variant,mean_time_s,std_time_s,accuracy_pct,std_accuracy_pct,mean_attempts");
  int rows = 0;
  while (std::getline(lines, line))
    if (!line.empty()) {
      ++rows;
      CHECK(std::count(line.begin(), line.end(), ',') == 6);
    }
  CHECK(rows == 6);

  const std::string md = slurp(dir / "report.md");
  CHECK(md.find("| bf-tp-oa |") != std::string::npos);
  CHECK(md.find("Attempts") != std::string::npos);

  const auto cal = load_calibration_set(dir / "calibration.json");
  CHECK(calibration_set_to_json(cal) == calibration_set_to_json(*r.calibration));
  fs::remove_all(dir);
}

TEST_CASE("evaluation needs priors for the gated variants") {
  const auto cfg = small_config();
  const auto d = sim::generate_dataset(cfg.scenario, 2);
  const auto maps = resolve_maps(d.sessions, nullptr, true);
  CHECK_THROWS_AS(evaluate(d.sessions, maps, nullptr, cfg.eval, 2, json::object()), std::invalid_argument);
  auto only_bf = cfg.eval;
  only_bf.variants = {Variant::bf};
  only_bf.modes = {filter::FilterMode::first_attempt};
  const auto r = evaluate(d.sessions, maps, nullptr, only_bf, 2, json::object());
  CHECK(r.modes.size() == 1);
  CHECK(r.modes[0].tests.empty());
  CHECK_THROWS_AS(resolve_maps(d.sessions, nullptr, false), std::invalid_argument);
}

TEST_CASE("report formats") {
  CHECK(parse_report_format("md") == ReportFormat::markdown);
  CHECK(parse_report_format("csv") == ReportFormat::csv);
  CHECK_FALSE(parse_report_format("html"));
}

TEST_CASE("CLI reports errors with a nonzero exit") {
  const auto dir = scratch("cli");
  fs::create_directories(dir);
  CHECK(run_cli("") != 0);
  CHECK(run_cli("eval --data " + (dir / "missing").string() + " --out x.json") != 0);
  {
    std::ofstream(dir / "bad.json") << R"({"eval": {"thresold": 0.9}})";
  }
  CHECK(run_cli("simulate --config " + (dir / "bad.json").string() + " --out " + (dir / "d").string()) == 1);
  CHECK(run_cli("simulate --participants 2 --requests 2 --seed 4 --out " + (dir / "d").string()) == 0);
  // Gated variants without priors.
  CHECK(run_cli("eval --data " + (dir / "d").string() + " --out " + (dir / "r.json").string()) == 1);
  CHECK(run_cli("report --in " + (dir / "nope.json").string()) == 1);
  fs::remove_all(dir);
}
