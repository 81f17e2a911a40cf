#include "mmref/temporal/gating.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace mmref::temporal {

void TemporalPrior::check() const {
  intentional.check();
  if (accidental) accidental->check();
  if (!(prior_intentional >= 0.0 && prior_intentional <= 1.0))
    throw std::invalid_argument("prior_intentional must lie in [0, 1]");
  if (!accidental && prior_intentional != 1.0)
    throw std::invalid_argument("a prior without an accidental model must have prior_intentional = 1");
}

nlohmann::json temporal_prior_to_json(const TemporalPrior& p) {
  nlohmann::json j = {{"intentional", gmm_to_json(p.intentional)}, {"prior_intentional", p.prior_intentional}};
  j["accidental"] = p.accidental ? gmm_to_json(*p.accidental) : nlohmann::json(nullptr);
  return j;
}

TemporalPrior temporal_prior_from_json(const nlohmann::json& j) {
  TemporalPrior p;
  p.intentional = gmm_from_json(j.at("intentional"));
  if (j.contains("accidental") && !j.at("accidental").is_null()) p.accidental = gmm_from_json(j.at("accidental"));
  p.prior_intentional = j.at("prior_intentional").get<double>();
  p.check();
  return p;
}

std::string_view to_string(GatingStrategy s) {
  switch (s) {
    case GatingStrategy::none: return "none";
    case GatingStrategy::gated: return "gated";
    case GatingStrategy::literal: return "literal";
  }
  return "?";
}

std::optional<GatingStrategy> parse_gating_strategy(std::string_view s) {
  if (s == "none") return GatingStrategy::none;
  if (s == "gated") return GatingStrategy::gated;
  if (s == "literal") return GatingStrategy::literal;
  return std::nullopt;
}

double gating_weight(double log_pdf_intentional, double log_pdf_accidental, double prior_intentional) {
  if (prior_intentional >= 1.0) return 1.0;
  if (prior_intentional <= 0.0) return 0.0;
  const double a = std::log(prior_intentional) + log_pdf_intentional;
  const double b = std::log(1.0 - prior_intentional) + log_pdf_accidental;
  if (!std::isfinite(a) && !std::isfinite(b)) return prior_intentional;
  if (!std::isfinite(b)) return 1.0;
  if (!std::isfinite(a)) return 0.0;
  // Logistic of the log-odds, written to avoid overflow on either side.
  const double d = b - a;
  return d > 0 ? std::exp(-d) / (1.0 + std::exp(-d)) : 1.0 / (1.0 + std::exp(d));
}

double gating_weight(const DeltaSample& delta, const Gmm& g_intent, const Gmm& g_accident, double prior_intentional) {
  const Vec3 x = delta.vec();
  return gating_weight(gmm_log_pdf_marginal(g_intent, x, delta.present),
                       gmm_log_pdf_marginal(g_accident, x, delta.present), prior_intentional);
}

double gating_weight(const DeltaSample& delta, const TemporalPrior& prior) {
  if (!prior.accidental) return 1.0;
  return gating_weight(delta, prior.intentional, *prior.accidental, prior.prior_intentional);
}

WeightedEvidence apply_temporal_prior(observation::Likelihood head, observation::Likelihood left,
                                      observation::Likelihood right, const ModalityWeights& w,
                                      GatingStrategy strategy, double literal_density) {
  for (double x : w)
    if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("gating weight outside [0, 1]");
  WeightedEvidence out{std::move(head), std::move(left), std::move(right), 1.0};
  if (strategy == GatingStrategy::literal) {
    out.scale = literal_density;
  } else if (strategy == GatingStrategy::gated) {
    observation::Likelihood* vs[3] = {&out.head, &out.left, &out.right};
    for (int m = 0; m < 3; ++m) {
      if (w[m] == 1.0) continue;
      for (double& v : *vs[m]) v = w[m] == 0.0 ? 1.0 : std::pow(v, w[m]);
    }
  }
  return out;
}

OnlineGate::OnlineGate(TemporalPrior prior, GatingConfig cfg) : prior_(std::move(prior)), cfg_(cfg) {}

void OnlineGate::observe(const EventRecord& e) {
  if (e.is_spatial()) {
    spatial_times_[static_cast<int>(e.modality)].push_back(e.time_ms);
  } else if (e.is_anchor()) {
    anchors_.push_back(e.time_ms);
  }
  refresh(e.time_ms);
}

void OnlineGate::refresh(std::int64_t now_ms) {
  if (anchors_.empty()) return;
  for (int axis = 0; axis < 3; ++axis) {
    if (spatial_times_[axis].empty()) continue;
    const std::int64_t t_event = spatial_times_[axis].back();
    std::int64_t anchor = anchors_.front();
    for (std::int64_t a : anchors_)
      if (std::llabs(a - t_event) < std::llabs(anchor - t_event)) anchor = a;
    const DeltaSample d = delta_for_anchor(anchor, spatial_times_, std::make_pair(static_cast<Modality>(axis), t_event));
    held_[axis] = {gating_weight(d, prior_), now_ms + cfg_.hold_ms};
    literal_density_ = std::exp(gmm_log_pdf_marginal(prior_.intentional, d.vec(), d.present));
  }
}

ModalityWeights OnlineGate::weights_at(std::int64_t now_ms) const {
  ModalityWeights w;
  const double fallback = prior_.accidental ? prior_.prior_intentional : 1.0;
  for (int axis = 0; axis < 3; ++axis) w[axis] = now_ms < held_[axis].until_ms ? held_[axis].weight : fallback;
  return w;
}

}  // namespace mmref::temporal
