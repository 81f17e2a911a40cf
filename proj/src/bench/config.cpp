#include "mmref/bench/config.hpp"

#include <fstream>
#include <stdexcept>

namespace mmref::bench {

using nlohmann::json;

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::bf: return "bf";
    case Variant::bf_tp: return "bf-tp";
    case Variant::bf_tp_oa: return "bf-tp-oa";
  }
  return "?";
}

std::optional<Variant> parse_variant(std::string_view s) {
  if (s == "bf") return Variant::bf;
  if (s == "bf-tp") return Variant::bf_tp;
  if (s == "bf-tp-oa") return Variant::bf_tp_oa;
  return std::nullopt;
}

std::vector<Variant> parse_variant_list(std::string_view s) {
  std::vector<Variant> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = s.find(',', start);
    const std::string_view token = s.substr(start, comma == std::string_view::npos ? s.npos : comma - start);
    auto v = parse_variant(token);
    if (!v) throw std::invalid_argument("unknown variant '" + std::string(token) + "'");
    out.push_back(*v);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

namespace {

std::string_view to_string(SampleMode m) { return m == SampleMode::event ? "event" : "anchor"; }

template <typename T>
T get_as(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument("key '" + key + "' has the wrong type");
  }
}

void require_object(const json& j, const std::string& section) {
  if (!j.is_object()) throw std::invalid_argument("section '" + section + "' must be an object");
}

// Library parsers report unknown keys without the section; prefix it.
template <typename F>
auto in_section(const std::string& section, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw std::invalid_argument(section + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(section + ": " + e.what());
  }
}

json svr_to_json(const calibration::SvrHyper& h) {
  return {{"C", h.C}, {"gamma", h.gamma}, {"epsilon", h.epsilon}, {"tolerance", h.tolerance}, {"max_sweeps", h.max_sweeps}};
}

CalibrationSettings calibration_from_json(const json& j) {
  require_object(j, "calibration");
  CalibrationSettings s;
  for (const auto& [key, v] : j.items()) {
    if (key == "C") s.svr.C = get_as<double>(v, key);
    else if (key == "gamma") s.svr.gamma = get_as<double>(v, key);
    else if (key == "epsilon") s.svr.epsilon = get_as<double>(v, key);
    else if (key == "tolerance") s.svr.tolerance = get_as<double>(v, key);
    else if (key == "max_sweeps") s.svr.max_sweeps = get_as<int>(v, key);
    else if (key == "ground_truth") s.ground_truth = get_as<bool>(v, key);
    else throw std::invalid_argument("unknown calibration key '" + key + "'");
  }
  if (!(s.svr.C > 0 && s.svr.gamma > 0 && s.svr.epsilon >= 0 && s.svr.tolerance > 0 && s.svr.max_sweeps > 0))
    throw std::invalid_argument("calibration: hyperparameters out of range");
  return s;
}

TrainSettings train_from_json(const json& j) {
  require_object(j, "train");
  TrainSettings s;
  for (const auto& [key, v] : j.items()) {
    if (key == "k_range") s.k_range = get_as<std::vector<int>>(v, key);
    else if (key == "samples") {
      const auto m = get_as<std::string>(v, key);
      if (m == "event") s.samples = SampleMode::event;
      else if (m == "anchor") s.samples = SampleMode::anchor;
      else throw std::invalid_argument("unknown sample mode '" + m + "'");
    } else if (key == "max_iterations") s.em.max_iterations = get_as<int>(v, key);
    else if (key == "relative_tolerance") s.em.relative_tolerance = get_as<double>(v, key);
    else if (key == "regularization") s.em.regularization = get_as<double>(v, key);
    else if (key == "restarts") s.em.restarts = get_as<int>(v, key);
    else throw std::invalid_argument("unknown train key '" + key + "'");
  }
  if (s.k_range.empty()) throw std::invalid_argument("train: k_range is empty");
  if (s.em.restarts < 1) throw std::invalid_argument("train: restarts must be >= 1");
  for (int k : s.k_range)
    if (k < 1) throw std::invalid_argument("train: k_range entries must be >= 1");
  return s;
}

json gating_to_json(const temporal::GatingConfig& g) {
  return {{"strategy", temporal::to_string(g.strategy)}, {"hold_ms", g.hold_ms}};
}

temporal::GatingConfig gating_from_json(const json& j) {
  require_object(j, "gating");
  temporal::GatingConfig g;
  for (const auto& [key, v] : j.items()) {
    if (key == "strategy") {
      const auto s = get_as<std::string>(v, key);
      auto parsed = temporal::parse_gating_strategy(s);
      if (!parsed) throw std::invalid_argument("unknown gating strategy '" + s + "'");
      g.strategy = *parsed;
    } else if (key == "hold_ms") {
      g.hold_ms = get_as<std::int64_t>(v, key);
      if (g.hold_ms < 0) throw std::invalid_argument("gating: hold_ms must be >= 0");
    } else {
      throw std::invalid_argument("unknown gating key '" + key + "'");
    }
  }
  return g;
}

EvalSettings eval_from_json(const json& j) {
  require_object(j, "eval");
  EvalSettings s;
  for (const auto& [key, v] : j.items()) {
    if (key == "c") s.filter.c = get_as<double>(v, key);
    else if (key == "threshold") s.filter.threshold = get_as<double>(v, key);
    else if (key == "likelihood") s.likelihood = in_section("eval.likelihood", [&] { return observation::likelihood_params_from_json(v); });
    else if (key == "gating") s.gating = in_section("eval.gating", [&] { return gating_from_json(v); });
    else if (key == "adaptation")
      s.adaptation = in_section("eval.adaptation", [&] { return temporal::adaptation_config_from_json(v); });
    else if (key == "variants") {
      s.variants.clear();
      for (const auto& name : get_as<std::vector<std::string>>(v, key)) {
        auto parsed = parse_variant(name);
        if (!parsed) throw std::invalid_argument("unknown variant '" + name + "'");
        s.variants.push_back(*parsed);
      }
    } else if (key == "modes") {
      s.modes.clear();
      for (const auto& name : get_as<std::vector<std::string>>(v, key)) {
        auto parsed = filter::parse_filter_mode(name);
        if (!parsed) throw std::invalid_argument("unknown filter mode '" + name + "'");
        s.modes.push_back(*parsed);
      }
    } else {
      throw std::invalid_argument("unknown eval key '" + key + "'");
    }
  }
  s.filter.check();
  if (s.variants.empty()) throw std::invalid_argument("eval: no variants");
  if (s.modes.empty()) throw std::invalid_argument("eval: no modes");
  return s;
}

}  // namespace

json config_to_json(const BenchConfig& c) {
  json variants = json::array(), modes = json::array();
  for (auto v : c.eval.variants) variants.push_back(to_string(v));
  for (auto m : c.eval.modes) modes.push_back(filter::to_string(m));
  json cal = svr_to_json(c.calibration.svr);
  cal["ground_truth"] = c.calibration.ground_truth;
  return {{"scenario", sim::scenario_to_json(c.scenario)},
          {"calibration", std::move(cal)},
          {"train",
           {{"k_range", c.train.k_range},
            {"samples", to_string(c.train.samples)},
            {"max_iterations", c.train.em.max_iterations},
            {"relative_tolerance", c.train.em.relative_tolerance},
            {"regularization", c.train.em.regularization},
            {"restarts", c.train.em.restarts}}},
          {"eval",
           {{"c", c.eval.filter.c},
            {"threshold", c.eval.filter.threshold},
            {"likelihood", observation::likelihood_params_to_json(c.eval.likelihood)},
            {"gating", gating_to_json(c.eval.gating)},
            {"adaptation", temporal::adaptation_config_to_json(c.eval.adaptation)},
            {"variants", std::move(variants)},
            {"modes", std::move(modes)}}}};
}

BenchConfig config_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  BenchConfig c;
  for (const auto& [key, v] : j.items()) {
    if (key == "scenario") c.scenario = in_section("scenario", [&] { return sim::scenario_from_json(v); });
    else if (key == "calibration") c.calibration = calibration_from_json(v);
    else if (key == "train") c.train = train_from_json(v);
    else if (key == "eval") c.eval = eval_from_json(v);
    else throw std::invalid_argument("unknown config key '" + key + "'");
  }
  return c;
}

BenchConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace mmref::bench
