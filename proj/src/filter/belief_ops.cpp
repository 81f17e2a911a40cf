#include "mmref/filter/belief_ops.hpp"

#include <stdexcept>
#include <vector>

namespace mmref::filter {

Belief init_belief(const core::Scene& scene) {
  if (scene.size() < 2) throw std::invalid_argument("a scene needs at least two objects to resolve a reference");
  return Belief::uniform(scene.size());
}

Belief time_update(const Belief& belief, double c) {
  if (!(c > 0.0 && c <= 1.0)) throw std::invalid_argument("transition constant c must lie in (0, 1]");
  const std::size_t active = belief.active_count();
  if (c == 1.0 || active < 2) return belief;
  const double leak = (1.0 - c) / static_cast<double>(active - 1);
  std::vector<double> next(belief.size(), 0.0);
  for (std::size_t i = 0; i < belief.size(); ++i)
    if (!belief.is_excluded(i)) next[i] = c * belief[i] + leak * (1.0 - belief[i]);
  return Belief::from_weights(std::move(next), belief.excluded());
}

Belief observation_update(const Belief& belief, std::span<const double> likelihood) {
  if (likelihood.size() != belief.size())
    throw std::invalid_argument("likelihood length differs from the number of objects");
  std::vector<double> next(belief.size(), 0.0);
  for (std::size_t i = 0; i < belief.size(); ++i)
    if (!belief.is_excluded(i)) next[i] = belief[i] * likelihood[i];
  return Belief::from_weights(std::move(next), belief.excluded());
}

namespace {

template <typename Less>
std::optional<std::size_t> decide_impl(const Belief& belief, double threshold, Less tie_less) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < belief.size(); ++i) {
    if (belief.is_excluded(i)) continue;
    if (!best || belief[i] > belief[*best] || (belief[i] == belief[*best] && tie_less(i, *best))) best = i;
  }
  if (best && belief[*best] >= threshold) return best;
  return std::nullopt;
}

}  // namespace

std::optional<std::size_t> decide(const Belief& belief, double threshold, const core::Scene& scene) {
  return decide_impl(belief, threshold,
                     [&](std::size_t a, std::size_t b) { return scene.objects[a].id < scene.objects[b].id; });
}

std::optional<std::size_t> decide(const Belief& belief, double threshold) {
  return decide_impl(belief, threshold, [](std::size_t a, std::size_t b) { return a < b; });
}

}  // namespace mmref::filter
