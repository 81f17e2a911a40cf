#include "mmref/bench/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

#include "mmref/temporal/map_adapt.hpp"

namespace mmref::bench {

using nlohmann::json;

namespace {

bool needs_prior(Variant v) { return v != Variant::bf; }

double mean(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

// Sample standard deviation; 0 for fewer than two values.
double stddev(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(x.size() - 1));
}

// Prior after seeing `samples` of earlier requests: both densities are
// adapted from the fold prior with everything accumulated so far.
temporal::TemporalPrior adapt_prior(const temporal::TemporalPrior& base, const std::vector<temporal::DeltaSample>& samples,
                                    const temporal::AdaptationConfig& cfg) {
  std::vector<temporal::Vec3> xi, xa;
  for (const auto& s : samples) (s.label == temporal::DeltaLabel::intentional ? xi : xa).push_back(s.vec());
  temporal::TemporalPrior out = base;
  if (!xi.empty()) out.intentional = temporal::map_adapt(base.intentional, xi, cfg);
  if (base.accidental && !xa.empty()) out.accidental = temporal::map_adapt(*base.accidental, xa, cfg);
  return out;
}

ParticipantRow summarize_participant(int pid, const std::vector<filter::RequestResult>& results) {
  ParticipantRow row;
  row.participant_id = pid;
  row.n_requests = static_cast<int>(results.size());
  double correct = 0, time = 0, attempts = 0;
  for (const auto& r : results) {
    correct += r.correct ? 1.0 : 0.0;
    time += r.decision_time_s;
    attempts += r.attempts;
  }
  const double n = std::max<double>(1.0, static_cast<double>(results.size()));
  row.accuracy_pct = 100.0 * correct / n;
  row.mean_time_s = time / n;
  row.mean_attempts = attempts / n;
  return row;
}

void finish_summary(VariantSummary& s) {
  std::vector<double> acc, time, att;
  for (const auto& p : s.participants) {
    acc.push_back(p.accuracy_pct);
    time.push_back(p.mean_time_s);
    att.push_back(p.mean_attempts);
  }
  s.accuracy_pct = mean(acc);
  s.std_accuracy_pct = stddev(acc);
  s.mean_time_s = mean(time);
  s.std_time_s = stddev(time);
  s.mean_attempts = mean(att);
}

std::vector<double> column(const VariantSummary& s, const std::string& metric) {
  std::vector<double> out;
  for (const auto& p : s.participants) out.push_back(metric == "accuracy_pct" ? p.accuracy_pct : p.mean_time_s);
  return out;
}

}  // namespace

const VariantSummary* ModeReport::find(Variant v) const {
  for (const auto& s : variants)
    if (s.variant == v) return &s;
  return nullptr;
}

const ModeReport* EvalReport::find(filter::FilterMode m) const {
  for (const auto& r : modes)
    if (r.mode == m) return &r;
  return nullptr;
}

PairedTest paired_test(const std::vector<double>& baseline, const std::vector<double>& candidate, bool greater) {
  if (baseline.size() != candidate.size()) throw std::invalid_argument("paired test needs equally many values");
  PairedTest t;
  t.alternative = greater ? "greater" : "less";
  t.n = static_cast<int>(baseline.size());
  std::vector<double> d;
  for (std::size_t i = 0; i < baseline.size(); ++i) d.push_back(candidate[i] - baseline[i]);
  t.mean_delta = mean(d);
  t.sd_delta = stddev(d);
  if (t.n < 2) return t;
  if (t.sd_delta == 0.0) {
    // Degenerate: every participant moved by the same amount.
    if (t.mean_delta != 0.0) t.p_one_tailed = ((t.mean_delta > 0) == greater) ? 0.0 : 1.0;
    return t;
  }
  const double stat = t.mean_delta / (t.sd_delta / std::sqrt(static_cast<double>(t.n)));
  t.t = stat;
  boost::math::students_t dist(static_cast<double>(t.n - 1));
  t.p_one_tailed = greater ? boost::math::cdf(boost::math::complement(dist, stat)) : boost::math::cdf(dist, stat);
  return t;
}

EvalReport evaluate(const std::vector<core::Session>& sessions, const std::map<int, observation::SensorMaps>& maps,
                    const PriorSet* priors, const EvalSettings& settings, std::uint64_t seed,
                    const json& config_echo, std::vector<RequestOutcome>* outcomes) {
  const bool any_prior = std::any_of(settings.variants.begin(), settings.variants.end(), needs_prior);
  const bool adaptive =
      std::find(settings.variants.begin(), settings.variants.end(), Variant::bf_tp_oa) != settings.variants.end();
  if (any_prior && !priors) throw std::invalid_argument("temporal-prior variants requested without trained priors");

  EvalReport report;
  report.seed = seed;
  report.config = config_echo;
  for (auto m : settings.modes) {
    ModeReport mr;
    mr.mode = m;
    for (auto v : settings.variants) {
      VariantSummary vs;
      vs.variant = v;
      mr.variants.push_back(std::move(vs));
    }
    report.modes.push_back(std::move(mr));
  }

  const auto lexicon = observation::KeywordLexicon::standard();
  for (const auto& session : sessions) {
    const int pid = session.participant_id;
    auto map_it = maps.find(pid);
    if (map_it == maps.end()) throw std::invalid_argument("no sensor maps for participant " + std::to_string(pid));
    filter::EngineModels models{map_it->second, settings.likelihood, lexicon};

    const FoldPrior* fold = nullptr;
    if (any_prior) {
      fold = priors->fold_for(pid);
      if (!fold) throw std::invalid_argument("no fold model for participant " + std::to_string(pid));
    }

    std::vector<std::vector<filter::FrameProjection>> projections;
    projections.reserve(session.requests.size());
    for (const auto& r : session.requests) projections.push_back(filter::project_request(r, models.maps));

    // Request i of the adaptive variant runs on the prior adapted with the
    // labelled samples of requests 0..i-1.
    std::vector<temporal::TemporalPrior> adapted;
    if (adaptive) {
      std::vector<temporal::DeltaSample> seen;
      adapted.push_back(fold->fit.prior);
      for (std::size_t i = 0; i + 1 < session.requests.size(); ++i) {
        auto s = request_samples(session.requests[i], session.scene, models.maps, lexicon, priors->samples, pid);
        seen.insert(seen.end(), s.begin(), s.end());
        adapted.push_back(adapt_prior(fold->fit.prior, seen, settings.adaptation));
      }
    }

    for (auto& mr : report.modes) {
      filter::FilterConfig fc = settings.filter;
      fc.mode = mr.mode;
      for (auto& vs : mr.variants) {
        std::vector<filter::RequestResult> results;
        for (std::size_t i = 0; i < session.requests.size(); ++i) {
          filter::TemporalSetup setup;
          setup.gating = settings.gating;
          if (vs.variant == Variant::bf_tp) setup.prior = &fold->fit.prior;
          else if (vs.variant == Variant::bf_tp_oa) setup.prior = &adapted[i];
          auto res = filter::run_projected(session.requests[i], session.scene, projections[i], models, fc, setup);
          report.max_normalization_error = std::max(report.max_normalization_error, res.max_normalization_error);
          report.total_steps += res.steps;
          if (outcomes) outcomes->push_back({pid, session.requests[i].request_id, vs.variant, mr.mode, res});
          results.push_back(std::move(res));
        }
        vs.participants.push_back(summarize_participant(pid, results));
      }
    }
  }

  for (auto& mr : report.modes) {
    for (auto& vs : mr.variants) finish_summary(vs);
    const std::pair<Variant, Variant> pairs[] = {
        {Variant::bf, Variant::bf_tp}, {Variant::bf_tp, Variant::bf_tp_oa}, {Variant::bf, Variant::bf_tp_oa}};
    for (const auto& [a, b] : pairs) {
      const auto* sa = mr.find(a);
      const auto* sb = mr.find(b);
      if (!sa || !sb) continue;
      for (const std::string metric : {"accuracy_pct", "mean_time_s"}) {
        PairedTest t = paired_test(column(*sa, metric), column(*sb, metric), metric == "accuracy_pct");
        t.baseline = a;
        t.candidate = b;
        t.metric = metric;
        mr.tests.push_back(t);
      }
    }
  }

  if (priors && priors->pooled) {
    for (const auto& r : temporal::densest_regions(priors->pooled->prior.intentional, 3)) {
      json mean_s = json::array(), std_s = json::array();
      for (int a = 0; a < 3; ++a) {
        // Axes sitting on the missing-modality sentinel carry no timing.
        const bool absent = std::abs(r.mean[a] - temporal::kMissingAxisSentinelS) < 1e-3;
        mean_s.push_back(absent ? json(nullptr) : json(r.mean[a]));
        std_s.push_back(absent ? json(nullptr) : json(r.marginal_std[a]));
      }
      report.timing_patterns.push_back({{"weight", r.weight}, {"mean_s", mean_s}, {"std_s", std_s}});
    }
  }
  return report;
}

namespace {

json summary_to_json(const VariantSummary& s) {
  json rows = json::array();
  for (const auto& p : s.participants)
    rows.push_back({{"participant_id", p.participant_id},
                    {"n_requests", p.n_requests},
                    {"accuracy_pct", p.accuracy_pct},
                    {"mean_time_s", p.mean_time_s},
                    {"mean_attempts", p.mean_attempts}});
  return {{"variant", to_string(s.variant)},
          {"mean_time_s", s.mean_time_s},
          {"std_time_s", s.std_time_s},
          {"accuracy_pct", s.accuracy_pct},
          {"std_accuracy_pct", s.std_accuracy_pct},
          {"mean_attempts", s.mean_attempts},
          {"participants", std::move(rows)}};
}

Variant variant_from(const json& j) {
  auto v = parse_variant(j.get<std::string>());
  if (!v) throw std::invalid_argument("unknown variant in report: " + j.dump());
  return *v;
}

VariantSummary summary_from_json(const json& j) {
  VariantSummary s;
  s.variant = variant_from(j.at("variant"));
  s.mean_time_s = j.at("mean_time_s").get<double>();
  s.std_time_s = j.at("std_time_s").get<double>();
  s.accuracy_pct = j.at("accuracy_pct").get<double>();
  s.std_accuracy_pct = j.at("std_accuracy_pct").get<double>();
  s.mean_attempts = j.at("mean_attempts").get<double>();
  for (const auto& r : j.at("participants"))
    s.participants.push_back({r.at("participant_id").get<int>(), r.at("n_requests").get<int>(),
                              r.at("accuracy_pct").get<double>(), r.at("mean_time_s").get<double>(),
                              r.at("mean_attempts").get<double>()});
  return s;
}

json test_to_json(const PairedTest& t) {
  return {{"baseline", to_string(t.baseline)},
          {"candidate", to_string(t.candidate)},
          {"metric", t.metric},
          {"alternative", t.alternative},
          {"n", t.n},
          {"mean_delta", t.mean_delta},
          {"sd_delta", t.sd_delta},
          {"t", t.t ? json(*t.t) : json(nullptr)},
          {"df", t.n - 1},
          {"p_one_tailed", t.p_one_tailed}};
}

PairedTest test_from_json(const json& j) {
  PairedTest t;
  t.baseline = variant_from(j.at("baseline"));
  t.candidate = variant_from(j.at("candidate"));
  t.metric = j.at("metric").get<std::string>();
  t.alternative = j.at("alternative").get<std::string>();
  t.n = j.at("n").get<int>();
  t.mean_delta = j.at("mean_delta").get<double>();
  t.sd_delta = j.at("sd_delta").get<double>();
  if (!j.at("t").is_null()) t.t = j.at("t").get<double>();
  t.p_one_tailed = j.at("p_one_tailed").get<double>();
  return t;
}

constexpr const char* kTestProcedure =
    "paired over participants: delta = candidate - baseline of per-participant accuracy or mean decision time; "
    "t = mean(delta) / (sd(delta) / sqrt(n)), sd with n - 1, df = n - 1; one-tailed p in the direction of "
    "improvement (higher accuracy, lower time); no multiple-comparison correction";

}  // namespace

json eval_report_to_json(const EvalReport& r) {
  json modes = json::array();
  for (const auto& m : r.modes) {
    json variants = json::array(), tests = json::array();
    for (const auto& v : m.variants) variants.push_back(summary_to_json(v));
    for (const auto& t : m.tests) tests.push_back(test_to_json(t));
    modes.push_back({{"mode", filter::to_string(m.mode)}, {"variants", std::move(variants)}, {"paired_tests", std::move(tests)}});
  }
  return {{"seed", r.seed},
          {"config", r.config},
          {"modes", std::move(modes)},
          {"max_normalization_error", r.max_normalization_error},
          {"total_steps", r.total_steps},
          {"timing_patterns", r.timing_patterns},
          {"test_procedure", kTestProcedure}};
}

EvalReport eval_report_from_json(const json& j) {
  EvalReport r;
  r.seed = j.at("seed").get<std::uint64_t>();
  r.config = j.at("config");
  for (const auto& mj : j.at("modes")) {
    ModeReport m;
    auto mode = filter::parse_filter_mode(mj.at("mode").get<std::string>());
    if (!mode) throw std::invalid_argument("unknown mode in report: " + mj.at("mode").dump());
    m.mode = *mode;
    for (const auto& v : mj.at("variants")) m.variants.push_back(summary_from_json(v));
    for (const auto& t : mj.at("paired_tests")) m.tests.push_back(test_from_json(t));
    r.modes.push_back(std::move(m));
  }
  r.max_normalization_error = j.at("max_normalization_error").get<double>();
  r.total_steps = j.at("total_steps").get<long>();
  r.timing_patterns = j.value("timing_patterns", json::array());
  return r;
}

void save_report(const EvalReport& r, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << eval_report_to_json(r).dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

EvalReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open report " + path.string());
  try {
    return eval_report_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace mmref::bench
