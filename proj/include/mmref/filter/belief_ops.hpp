#pragma once

// Single-step operations of the discrete Bayes filter over scene objects.

#include <optional>
#include <span>

#include "mmref/core/types.hpp"

namespace mmref::filter {

using core::Belief;

/// Uniform belief. Throws std::invalid_argument for fewer than two objects.
Belief init_belief(const core::Scene& scene);

/// Symmetric constant-c transition over the active objects:
/// b_i <- c b_i + (1 - c) / (N - 1) (1 - b_i).
Belief time_update(const Belief& belief, double c);

/// Bayes rule. Throws std::domain_error when the product has no mass left.
Belief observation_update(const Belief& belief, std::span<const double> likelihood);

/// Index of the most probable active object if it reaches `threshold`.
/// Equal probabilities resolve to the lowest object id.
std::optional<std::size_t> decide(const Belief& belief, double threshold, const core::Scene& scene);

/// Same, breaking ties by lowest index.
std::optional<std::size_t> decide(const Belief& belief, double threshold);

}  // namespace mmref::filter
