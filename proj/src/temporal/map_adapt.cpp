#include "mmref/temporal/map_adapt.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace mmref::temporal {

void AdaptationConfig::check() const {
  if (!(relevance_factor > 0.0)) throw std::invalid_argument("relevance_factor must be positive");
  if (!adapt_weights && !adapt_means && !adapt_covariances)
    throw std::invalid_argument("at least one of adapt_weights/adapt_means/adapt_covariances must be set");
}

nlohmann::json adaptation_config_to_json(const AdaptationConfig& c) {
  return {{"relevance_factor", c.relevance_factor},
          {"adapt_weights", c.adapt_weights},
          {"adapt_means", c.adapt_means},
          {"adapt_covariances", c.adapt_covariances}};
}

AdaptationConfig adaptation_config_from_json(const nlohmann::json& j) {
  AdaptationConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "relevance_factor") c.relevance_factor = value.get<double>();
    else if (key == "adapt_weights") c.adapt_weights = value.get<bool>();
    else if (key == "adapt_means") c.adapt_means = value.get<bool>();
    else if (key == "adapt_covariances") c.adapt_covariances = value.get<bool>();
    else throw std::invalid_argument("unknown adaptation key '" + key + "'");
  }
  c.check();
  return c;
}

Gmm map_adapt(const Gmm& model, std::span<const Vec3> samples, const AdaptationConfig& cfg) {
  cfg.check();
  if (samples.empty()) throw std::invalid_argument("map_adapt needs at least one sample");
  const std::size_t k = model.size();
  const double r = cfg.relevance_factor;

  // Responsibilities under the prior model.
  std::vector<double> nk(k, 0.0);
  std::vector<Vec3> first(k, Vec3::Zero());
  std::vector<Mat3> second(k, Mat3::Zero());
  std::vector<double> lp(k);
  for (const auto& x : samples) {
    double m = -INFINITY;
    for (std::size_t c = 0; c < k; ++c) {
      lp[c] = std::log(model.weights[c]) + gaussian_log_pdf(x, model.means[c], model.covariances[c]);
      m = std::max(m, lp[c]);
    }
    if (!std::isfinite(m)) continue;
    double s = 0.0;
    for (std::size_t c = 0; c < k; ++c) s += std::exp(lp[c] - m);
    for (std::size_t c = 0; c < k; ++c) {
      const double resp = std::exp(lp[c] - m) / s;
      nk[c] += resp;
      first[c] += resp * x;
      second[c] += resp * x * x.transpose();
    }
  }

  Gmm out = model;
  const double total = static_cast<double>(samples.size());
  for (std::size_t c = 0; c < k; ++c) {
    if (nk[c] <= 0.0) continue;
    const double alpha = nk[c] / (nk[c] + r);
    const Vec3 ex = first[c] / nk[c];
    if (cfg.adapt_weights) out.weights[c] = alpha * nk[c] / total + (1.0 - alpha) * model.weights[c];
    if (cfg.adapt_means) out.means[c] = alpha * ex + (1.0 - alpha) * model.means[c];
    if (cfg.adapt_covariances) {
      const Mat3 exx = second[c] / nk[c];
      const Vec3& mu = model.means[c];
      Mat3 cov = alpha * exx + (1.0 - alpha) * (model.covariances[c] + mu * mu.transpose()) -
                 out.means[c] * out.means[c].transpose();
      out.covariances[c] = 0.5 * (cov + cov.transpose());
    }
  }
  if (cfg.adapt_weights) {
    double s = 0.0;
    for (double w : out.weights) s += w;
    for (double& w : out.weights) w /= s;
  }
  return out;
}

}  // namespace mmref::temporal
