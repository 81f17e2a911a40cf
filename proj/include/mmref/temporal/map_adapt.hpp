#pragma once

// MAP adaptation of a trained mixture toward new data (relevance-factor
// interpolation of the sufficient statistics, one EM-like pass).

#include <span>

#include <nlohmann/json.hpp>

#include "mmref/temporal/gmm.hpp"

namespace mmref::temporal {

struct AdaptationConfig {
  double relevance_factor = 16.0;
  bool adapt_weights = true;
  bool adapt_means = true;
  bool adapt_covariances = false;

  /// Throws std::invalid_argument for r <= 0 or when every flag is off.
  void check() const;
};

nlohmann::json adaptation_config_to_json(const AdaptationConfig& c);
AdaptationConfig adaptation_config_from_json(const nlohmann::json& j);

/// Returns the adapted model; `model` is left untouched. With alpha_k =
/// n_k / (n_k + r), each adapted statistic is alpha_k * data + (1 - alpha_k) * prior.
Gmm map_adapt(const Gmm& model, std::span<const Vec3> samples, const AdaptationConfig& cfg);

}  // namespace mmref::temporal
