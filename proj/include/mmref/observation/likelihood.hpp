#pragma once

// Per-modality observation likelihoods over scene objects. All vectors are
// unnormalized and strictly positive; an absent or unflagged modality yields
// a vector of ones.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmref/core/types.hpp"
#include "mmref/observation/lexicon.hpp"

namespace mmref::observation {

using core::Vec2;
using core::Vec3;

/// Maps a head pose or finger direction to a point on the table.
using TableMapping = std::function<Vec2(const Vec3&)>;

enum class Hand { left, right };

/// One mapping per spatial channel.
struct SensorMaps {
  TableMapping head;
  TableMapping left;
  TableMapping right;
};

struct LikelihoodParams {
  Vec2 sigma_head{0.05, 0.05};
  Vec2 sigma_left{0.03, 0.03};
  Vec2 sigma_right{0.03, 0.03};

  void check() const;
};

nlohmann::json likelihood_params_to_json(const LikelihoodParams& p);
LikelihoodParams likelihood_params_from_json(const nlohmann::json& j);

using Likelihood = std::vector<double>;

Likelihood uniform_likelihood(std::size_t n);

/// exp(-sum_axis (point - p_i)^2 / (2 sigma_axis^2)) for every object i.
Likelihood spatial_likelihood(const Vec2& point, const core::Scene& scene, const Vec2& sigma);

Likelihood head_likelihood(const core::ObservationFrame& frame, const core::Scene& scene, const TableMapping& f_h,
                           const LikelihoodParams& params);

Likelihood hand_likelihood(const core::ObservationFrame& frame, const core::Scene& scene, const TableMapping& f,
                           const Vec2& sigma, Hand side);

/// Unigram model with additive smoothing on attribute matches; deictic and
/// other words contribute an object-independent factor.
Likelihood speech_likelihood(std::span<const std::string> words, const core::Scene& scene,
                             const KeywordLexicon& lexicon);

/// Elementwise product. Throws std::invalid_argument on length mismatch.
Likelihood combine_likelihood(std::span<const double> head, std::span<const double> left,
                              std::span<const double> right, std::span<const double> speech);

/// Index of the object nearest to `point` (Euclidean).
std::size_t nearest_object(const Vec2& point, const core::Scene& scene);

}  // namespace mmref::observation
