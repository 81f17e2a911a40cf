#include "mmref/sim/scene_gen.hpp"

#include <iterator>
#include <random>
#include <stdexcept>
#include <string>

namespace mmref::sim {

core::Scene generate_scene(const SceneConfig& cfg, std::uint64_t seed) {
  if (cfg.n_objects < 2) throw std::invalid_argument("a scene needs at least two objects");
  std::mt19937_64 rng(seed);
  core::Scene scene;
  const auto& b = scene.table_bounds;
  std::uniform_real_distribution<double> ux(b.min_x + cfg.margin_m, b.max_x - cfg.margin_m);
  std::uniform_real_distribution<double> uy(b.min_y + cfg.margin_m, b.max_y - cfg.margin_m);
  std::uniform_int_distribution<int> color(0, static_cast<int>(std::size(core::kAllColors)) - 1);
  std::uniform_int_distribution<int> size(0, static_cast<int>(std::size(core::kAllSizes)) - 1);
  std::uniform_int_distribution<int> shape(0, static_cast<int>(std::size(core::kAllShapes)) - 1);

  constexpr int kMaxTries = 2000;
  for (int i = 0; i < cfg.n_objects; ++i) {
    core::SceneObject obj;
    obj.id = i;
    bool placed = false;
    for (int attempt = 0; attempt < kMaxTries && !placed; ++attempt) {
      obj.position = {ux(rng), uy(rng)};
      placed = true;
      for (const auto& o : scene.objects)
        if ((o.position - obj.position).norm() < cfg.min_separation_m) {
          placed = false;
          break;
        }
    }
    if (!placed)
      throw std::runtime_error("cannot place " + std::to_string(cfg.n_objects) + " objects " +
                               std::to_string(cfg.min_separation_m) + " m apart on the table");
    obj.color = core::kAllColors[color(rng)];
    obj.size = core::kAllSizes[size(rng)];
    obj.shape = core::kAllShapes[shape(rng)];
    scene.objects.push_back(obj);
  }
  if (cfg.ambiguity) {
    auto& twin = scene.objects[1];
    twin.color = scene.objects[0].color;
    twin.size = scene.objects[0].size;
    twin.shape = scene.objects[0].shape;
  }
  return scene;
}

}  // namespace mmref::sim
