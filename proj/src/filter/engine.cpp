#include "mmref/filter/engine.hpp"

#include <algorithm>
#include <stdexcept>

#include "mmref/temporal/events.hpp"

namespace mmref::filter {

using observation::Likelihood;

std::string_view to_string(FilterMode m) { return m == FilterMode::first_attempt ? "first_attempt" : "multi_attempt"; }

std::optional<FilterMode> parse_filter_mode(std::string_view s) {
  if (s == "first_attempt" || s == "first") return FilterMode::first_attempt;
  if (s == "multi_attempt" || s == "multi") return FilterMode::multi_attempt;
  return std::nullopt;
}

void FilterConfig::check() const {
  if (!(c > 0.0 && c <= 1.0)) throw std::invalid_argument("c must lie in (0, 1]");
  if (!(threshold > 0.0 && threshold <= 1.0)) throw std::invalid_argument("threshold must lie in (0, 1]");
}

nlohmann::json filter_config_to_json(const FilterConfig& c) {
  return {{"c", c.c}, {"threshold", c.threshold}, {"mode", to_string(c.mode)}};
}

FilterConfig filter_config_from_json(const nlohmann::json& j) {
  FilterConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "c") c.c = value.get<double>();
    else if (key == "threshold") c.threshold = value.get<double>();
    else if (key == "mode") {
      auto m = parse_filter_mode(value.get<std::string>());
      if (!m) throw std::invalid_argument("unknown filter mode '" + value.get<std::string>() + "'");
      c.mode = *m;
    } else {
      throw std::invalid_argument("unknown filter key '" + key + "'");
    }
  }
  c.check();
  return c;
}

std::vector<FrameProjection> project_request(const core::Request& request, const observation::SensorMaps& maps) {
  std::vector<FrameProjection> out(request.frames.size());
  for (std::size_t k = 0; k < request.frames.size(); ++k) {
    const auto& f = request.frames[k];
    if (f.head_fixation) out[k].head = maps.head(f.head);
    if (f.left_pointing && f.left_dir) out[k].left = maps.left(*f.left_dir);
    if (f.right_pointing && f.right_dir) out[k].right = maps.right(*f.right_dir);
  }
  return out;
}

nlohmann::json request_result_to_json(const RequestResult& r) {
  nlohmann::json guesses = nlohmann::json::array();
  for (const auto& g : r.guesses)
    guesses.push_back({{"object_id", g.object_id}, {"time_s", g.time_s}, {"voluntary", g.voluntary}});
  return {{"guesses", std::move(guesses)},
          {"correct", r.correct},
          {"decision_time_s", r.decision_time_s},
          {"attempts", r.attempts}};
}

namespace {

// Divides by the maximum; a constant factor never changes the posterior but
// keeps products of several channels away from underflow.
void rescale(Likelihood& v) {
  const double m = *std::max_element(v.begin(), v.end());
  if (m > 0.0 && m != 1.0)
    for (double& x : v) x /= m;
}

Likelihood spatial_or_ones(const std::optional<core::Vec2>& point, const core::Scene& scene,
                           const core::Vec2& sigma) {
  if (!point) return observation::uniform_likelihood(scene.size());
  Likelihood v = observation::spatial_likelihood(*point, scene, sigma);
  rescale(v);
  return v;
}

}  // namespace

Belief step(const Belief& belief, const FrameEvidence& ev, double c) {
  const Belief predicted = time_update(belief, c);
  auto weighted = temporal::apply_temporal_prior(ev.head, ev.left, ev.right, ev.weights, ev.strategy,
                                                 ev.literal_density);
  Likelihood combined = observation::combine_likelihood(weighted.head, weighted.left, weighted.right, ev.speech);
  if (weighted.scale != 1.0)
    for (double& x : combined) x *= weighted.scale;
  return observation_update(predicted, combined);
}

FilterSession::FilterSession(const core::Scene& scene, const EngineModels& models, const FilterConfig& config,
                             const TemporalSetup& temporal)
    : scene_(scene), models_(models), config_(config), temporal_(temporal), belief_(init_belief(scene)) {
  config_.check();
  if (temporal_.prior && temporal_.gating.strategy != temporal::GatingStrategy::none)
    gate_.emplace(*temporal_.prior, temporal_.gating);
}

const Belief& FilterSession::advance(const core::ObservationFrame& frame, const FrameProjection& proj) {
  const std::size_t n = scene_.size();
  const auto& p = models_.params;
  evidence_.head = spatial_or_ones(proj.head, scene_, p.sigma_head);
  evidence_.left = spatial_or_ones(proj.left, scene_, p.sigma_left);
  evidence_.right = spatial_or_ones(proj.right, scene_, p.sigma_right);

  const auto speech = temporal::speech_events(previous_speech_, frame, models_.lexicon);
  std::vector<std::string> words;
  for (const auto& e : speech)
    if (!e.word.empty()) words.push_back(e.word);
  evidence_.speech = words.empty() ? observation::uniform_likelihood(n)
                                   : observation::speech_likelihood(words, scene_, models_.lexicon);

  const std::array<bool, 3> active{proj.head.has_value(), proj.left.has_value(), proj.right.has_value()};
  if (gate_) {
    for (int m = 0; m < 3; ++m) {
      if (active[m] && !previous_active_[m]) {
        temporal::EventRecord e;
        e.modality = static_cast<temporal::Modality>(m);
        e.time_ms = frame.timestamp_ms;
        gate_->observe(e);
      }
    }
    for (const auto& e : speech) gate_->observe(e);
    evidence_.weights = gate_->weights_at(frame.timestamp_ms);
    evidence_.strategy = temporal_.gating.strategy;
    evidence_.literal_density = gate_->literal_density();
  } else {
    evidence_.weights = {1.0, 1.0, 1.0};
    evidence_.strategy = temporal::GatingStrategy::none;
    evidence_.literal_density = 1.0;
  }
  previous_active_ = active;
  previous_speech_ = frame.speech_text;

  belief_ = step(belief_, evidence_, config_.c);
  return belief_;
}

RequestResult run_request(const core::Request& request, const core::Scene& scene, const EngineModels& models,
                          const FilterConfig& config, const TemporalSetup& temporal) {
  return run_projected(request, scene, project_request(request, models.maps), models, config, temporal);
}

RequestResult run_projected(const core::Request& request, const core::Scene& scene,
                            const std::vector<FrameProjection>& projections, const EngineModels& models,
                            const FilterConfig& config, const TemporalSetup& temporal) {
  if (request.frames.empty()) throw std::invalid_argument("request " + std::to_string(request.request_id) + " has no frames");
  if (projections.size() != request.frames.size())
    throw std::invalid_argument("projection count differs from frame count");

  std::int64_t speech_start = request.frames.front().timestamp_ms;
  for (const auto& f : request.frames)
    if (!f.speech_text.empty()) {
      speech_start = f.timestamp_ms;
      break;
    }
  auto elapsed = [&](std::int64_t t) { return std::max<std::int64_t>(0, t - speech_start) / 1000.0; };

  RequestResult result;
  FilterSession session(scene, models, config, temporal);
  bool done = false;
  for (std::size_t k = 0; k < request.frames.size() && !done; ++k) {
    const auto& b = session.advance(request.frames[k], projections[k]);
    ++result.steps;
    result.max_normalization_error = std::max(result.max_normalization_error, core::normalization_error(b));

    const auto choice = decide(b, config.threshold, scene);
    if (!choice) continue;
    const int id = scene.objects[*choice].id;
    result.guesses.push_back({id, elapsed(request.frames[k].timestamp_ms), true});
    if (config.mode == FilterMode::first_attempt || id == request.target_id) {
      done = true;
    } else {
      session.exclude(*choice);
      if (session.belief().active_count() == 0) done = true;
    }
  }
  if (!done) {
    const auto forced = decide(session.belief(), 0.0, scene);
    result.guesses.push_back({scene.objects[*forced].id, elapsed(request.frames.back().timestamp_ms), false});
  }
  result.attempts = static_cast<int>(result.guesses.size());
  result.correct = result.guesses.back().object_id == request.target_id;
  result.decision_time_s = result.guesses.back().time_s;
  return result;
}

}  // namespace mmref::filter
