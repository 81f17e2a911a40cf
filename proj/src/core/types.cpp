#include "mmref/core/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mmref::core {

std::string_view to_string(Color c) {
  switch (c) {
    case Color::red: return "red";
    case Color::green: return "green";
    case Color::blue: return "blue";
    case Color::yellow: return "yellow";
  }
  return "?";
}

std::string_view to_string(Size s) {
  return s == Size::small ? "small" : "large";
}

std::string_view to_string(Shape s) {
  switch (s) {
    case Shape::cube: return "cube";
    case Shape::cylinder: return "cylinder";
    case Shape::brick: return "brick";
  }
  return "?";
}

std::optional<Color> parse_color(std::string_view s) {
  for (Color c : kAllColors)
    if (to_string(c) == s) return c;
  return std::nullopt;
}

std::optional<Size> parse_size(std::string_view s) {
  for (Size v : kAllSizes)
    if (to_string(v) == s) return v;
  return std::nullopt;
}

std::optional<Shape> parse_shape(std::string_view s) {
  for (Shape v : kAllShapes)
    if (to_string(v) == s) return v;
  return std::nullopt;
}

std::optional<std::size_t> Scene::index_of(int id) const {
  for (std::size_t i = 0; i < objects.size(); ++i)
    if (objects[i].id == id) return i;
  return std::nullopt;
}

Belief Belief::uniform(std::size_t n) {
  if (n == 0) throw std::invalid_argument("belief over an empty scene");
  Belief b;
  b.probs_.assign(n, 1.0 / static_cast<double>(n));
  b.excluded_.assign(n, false);
  return b;
}

Belief Belief::from_weights(std::vector<double> weights, std::vector<bool> excluded) {
  if (excluded.empty()) excluded.assign(weights.size(), false);
  if (excluded.size() != weights.size())
    throw std::invalid_argument("belief weights and exclusion mask differ in length");

  double mass = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (excluded[i]) {
      weights[i] = 0.0;
      continue;
    }
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i]))
      throw std::domain_error("belief weight is negative or not finite");
    mass += weights[i];
  }
  if (!(mass > 0.0)) throw std::domain_error("belief has no probability mass left");
  for (std::size_t i = 0; i < weights.size(); ++i)
    if (!excluded[i]) weights[i] /= mass;

  Belief b;
  b.probs_ = std::move(weights);
  b.excluded_ = std::move(excluded);
  return b;
}

std::size_t Belief::active_count() const {
  return static_cast<std::size_t>(std::count(excluded_.begin(), excluded_.end(), false));
}

Belief Belief::excluding(std::size_t i) const {
  auto excluded = excluded_;
  excluded.at(i) = true;
  return from_weights(probs_, std::move(excluded));
}

double normalization_error(const Belief& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i)
    if (!b.is_excluded(i)) sum += b[i];
  return std::abs(sum - 1.0);
}

}  // namespace mmref::core
