#pragma once

#include <cstdint>

#include <nlohmann/json.hpp>

#include "mmref/core/types.hpp"

namespace mmref::sim {

struct SceneConfig {
  int n_objects = 6;
  bool ambiguity = true;         // guarantee an attribute-duplicate pair
  double min_separation_m = 0.10;
  double margin_m = 0.05;        // keep objects this far inside the table edge
};

/// Objects with ids 0..n-1 placed by rejection sampling. Throws
/// std::invalid_argument for n < 2 and std::runtime_error when the objects
/// cannot be placed without overlap.
core::Scene generate_scene(const SceneConfig& cfg, std::uint64_t seed);

}  // namespace mmref::sim
