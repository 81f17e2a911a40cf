#pragma once

// Textbook HMM forward pass over scene objects, written independently of the
// filter: an explicit transition matrix, raw Gaussian emissions and a
// per-word attribute factor. Used as the reference for belief trajectories.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mmref/core/types.hpp"
#include "mmref/filter/engine.hpp"
#include "mmref/observation/lexicon.hpp"

namespace oracle {

using mmref::core::Vec2;

struct Case {
  mmref::core::Scene scene;
  std::vector<bool> excluded;
  std::vector<mmref::core::ObservationFrame> frames;
  std::vector<mmref::filter::FrameProjection> projections;
  std::vector<std::vector<std::string>> new_words;  // words appended at each frame
  double c = 0.95;
  mmref::observation::LikelihoodParams params;
};

inline Case random_case(std::uint64_t seed) {
  using namespace mmref::core;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto pick = [&](int n) { return static_cast<int>(u(rng) * n) % n; };

  Case k;
  const int n = 2 + pick(4);  // 2..5
  for (int i = 0; i < n; ++i) {
    SceneObject o;
    o.id = 10 + i;
    o.position = {-0.35 + 0.7 * u(rng), -0.25 + 0.5 * u(rng)};
    o.color = kAllColors[pick(4)];
    o.size = kAllSizes[pick(2)];
    o.shape = kAllShapes[pick(3)];
    k.scene.objects.push_back(o);
  }
  k.excluded.assign(n, false);
  if (n > 2 && u(rng) < 0.3) k.excluded[pick(n)] = true;

  k.c = 0.5 + 0.5 * u(rng);
  k.params.sigma_head = {0.03 + 0.2 * u(rng), 0.03 + 0.2 * u(rng)};
  k.params.sigma_left = {0.03 + 0.2 * u(rng), 0.03 + 0.2 * u(rng)};
  k.params.sigma_right = {0.03 + 0.2 * u(rng), 0.03 + 0.2 * u(rng)};

  static const std::vector<std::string> vocabulary{"red", "blue", "green", "yellow", "small", "large", "big",
                                                   "cube", "brick", "cylinder", "this", "that", "the", "please"};
  const int frames = 1 + pick(20);
  std::string transcript;
  auto point = [&] { return Vec2{-0.4 + 0.8 * u(rng), -0.3 + 0.6 * u(rng)}; };
  for (int t = 0; t < frames; ++t) {
    ObservationFrame f;
    f.timestamp_ms = 16 * t + (t % 3 == 0 ? 1 : 0);
    mmref::filter::FrameProjection p;
    if (u(rng) < 0.5) p.head = point();
    if (u(rng) < 0.3) p.left = point();
    if (u(rng) < 0.3) p.right = point();
    std::vector<std::string> added;
    if (u(rng) < 0.3) {
      added.push_back(vocabulary[pick(static_cast<int>(vocabulary.size()))]);
      transcript += (transcript.empty() ? "" : " ") + added.back();
    }
    f.speech_text = transcript;
    k.frames.push_back(f);
    k.projections.push_back(p);
    k.new_words.push_back(added);
  }
  return k;
}

inline double gauss2(const Vec2& x, const Vec2& mu, const Vec2& sigma) {
  const Vec2 d = x - mu;
  return std::exp(-0.5 * (d.x() * d.x() / (sigma.x() * sigma.x()) + d.y() * d.y() / (sigma.y() * sigma.y())));
}

/// Beliefs after every frame.
inline std::vector<std::vector<double>> forward(const Case& k, const mmref::observation::KeywordLexicon& lexicon) {
  const std::size_t n = k.scene.size();
  std::size_t active = 0;
  for (bool e : k.excluded) active += e ? 0 : 1;

  std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (k.excluded[i] || k.excluded[j]) continue;
      A[i][j] = i == j ? k.c : (1.0 - k.c) / static_cast<double>(active - 1);
    }

  std::vector<double> alpha(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) alpha[i] = k.excluded[i] ? 0.0 : 1.0 / static_cast<double>(active);

  std::vector<std::vector<double>> out;
  for (std::size_t t = 0; t < k.frames.size(); ++t) {
    std::vector<double> next(n, 0.0);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) next[j] += alpha[i] * A[i][j];

    const auto& p = k.projections[t];
    for (std::size_t j = 0; j < n; ++j) {
      const auto& obj = k.scene.objects[j];
      double e = 1.0;
      if (p.head) e *= gauss2(*p.head, obj.position, k.params.sigma_head);
      if (p.left) e *= gauss2(*p.left, obj.position, k.params.sigma_left);
      if (p.right) e *= gauss2(*p.right, obj.position, k.params.sigma_right);
      for (const auto& w : k.new_words[t]) {
        auto it = lexicon.attribute_words.find(w);
        if (it == lexicon.attribute_words.end()) continue;
        const auto& token = it->second;
        const auto colon = token.find(':');
        const std::string kind = token.substr(0, colon), value = token.substr(colon + 1);
        bool match = false;
        if (kind == "color") match = value == mmref::core::to_string(obj.color);
        if (kind == "size") match = value == mmref::core::to_string(obj.size);
        if (kind == "shape") match = value == mmref::core::to_string(obj.shape);
        e *= (match ? 1.0 : 0.0) + lexicon.smoothing_alpha;
      }
      next[j] *= e;
    }
    double z = 0.0;
    for (double x : next) z += x;
    for (double& x : next) x /= z;
    alpha = next;
    out.push_back(alpha);
  }
  return out;
}

/// Largest absolute difference between the filter and the oracle over a case.
inline double max_abs_deviation(const Case& k) {
  mmref::filter::EngineModels models;
  models.params = k.params;
  mmref::filter::FilterConfig cfg;
  cfg.c = k.c;
  mmref::filter::FilterSession session(k.scene, models, cfg, {});
  for (std::size_t i = 0; i < k.excluded.size(); ++i)
    if (k.excluded[i]) session.exclude(i);
  const auto expected = forward(k, models.lexicon);
  double worst = 0.0;
  for (std::size_t t = 0; t < k.frames.size(); ++t) {
    const auto& b = session.advance(k.frames[t], k.projections[t]);
    for (std::size_t i = 0; i < b.size(); ++i) worst = std::max(worst, std::abs(b[i] - expected[t][i]));
  }
  return worst;
}

}  // namespace oracle
