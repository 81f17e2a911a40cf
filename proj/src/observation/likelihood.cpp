#include "mmref/observation/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mmref/core/dataset_io.hpp"

namespace mmref::observation {

void LikelihoodParams::check() const {
  for (const Vec2* s : {&sigma_head, &sigma_left, &sigma_right})
    if (!(s->x() > 0) || !(s->y() > 0)) throw std::invalid_argument("likelihood sigma entries must be > 0");
}

nlohmann::json likelihood_params_to_json(const LikelihoodParams& p) {
  return {{"sigma_head", core::to_json(p.sigma_head)},
          {"sigma_left", core::to_json(p.sigma_left)},
          {"sigma_right", core::to_json(p.sigma_right)}};
}

LikelihoodParams likelihood_params_from_json(const nlohmann::json& j) {
  LikelihoodParams p;
  for (const auto& [key, value] : j.items()) {
    if (key == "sigma_head") p.sigma_head = core::vec2_from_json(value);
    else if (key == "sigma_left") p.sigma_left = core::vec2_from_json(value);
    else if (key == "sigma_right") p.sigma_right = core::vec2_from_json(value);
    else throw std::invalid_argument("unknown likelihood key '" + key + "'");
  }
  p.check();
  return p;
}

Likelihood uniform_likelihood(std::size_t n) { return Likelihood(n, 1.0); }

Likelihood spatial_likelihood(const Vec2& point, const core::Scene& scene, const Vec2& sigma) {
  Likelihood out(scene.size());
  for (std::size_t i = 0; i < scene.size(); ++i) {
    const Vec2 d = point - scene.objects[i].position;
    const double e = 0.5 * (d.x() * d.x() / (sigma.x() * sigma.x()) + d.y() * d.y() / (sigma.y() * sigma.y()));
    // Clamp to the smallest normal so evidence can never zero out an object.
    out[i] = std::max(std::exp(-e), std::numeric_limits<double>::min());
  }
  return out;
}

Likelihood head_likelihood(const core::ObservationFrame& frame, const core::Scene& scene, const TableMapping& f_h,
                           const LikelihoodParams& params) {
  if (!frame.head_fixation) return uniform_likelihood(scene.size());
  return spatial_likelihood(f_h(frame.head), scene, params.sigma_head);
}

Likelihood hand_likelihood(const core::ObservationFrame& frame, const core::Scene& scene, const TableMapping& f,
                           const Vec2& sigma, Hand side) {
  const bool pointing = side == Hand::left ? frame.left_pointing : frame.right_pointing;
  const auto& dir = side == Hand::left ? frame.left_dir : frame.right_dir;
  if (!pointing || !dir) return uniform_likelihood(scene.size());
  return spatial_likelihood(f(*dir), scene, sigma);
}

Likelihood speech_likelihood(std::span<const std::string> words, const core::Scene& scene,
                             const KeywordLexicon& lexicon) {
  Likelihood out = uniform_likelihood(scene.size());
  const double alpha = lexicon.smoothing_alpha;
  const double norm = 1.0 + alpha * static_cast<double>(lexicon.attribute_words.size());
  for (const auto& w : words) {
    auto it = lexicon.attribute_words.find(w);
    if (it == lexicon.attribute_words.end()) continue;  // object-independent factor
    for (std::size_t i = 0; i < scene.size(); ++i) {
      const double match = has_attribute(scene.objects[i], it->second) ? 1.0 : 0.0;
      out[i] *= (match + alpha) / norm;
    }
  }
  return out;
}

Likelihood combine_likelihood(std::span<const double> head, std::span<const double> left,
                              std::span<const double> right, std::span<const double> speech) {
  const std::size_t n = head.size();
  if (left.size() != n || right.size() != n || speech.size() != n)
    throw std::invalid_argument("likelihood vectors differ in length");
  Likelihood out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = head[i] * left[i] * right[i] * speech[i];
  return out;
}

std::size_t nearest_object(const Vec2& point, const core::Scene& scene) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < scene.size(); ++i) {
    const double d = (point - scene.objects[i].position).squaredNorm();
    if (d < best_d) { best_d = d; best = i; }
  }
  return best;
}

}  // namespace mmref::observation
