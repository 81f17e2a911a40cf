#pragma once

// Domain types shared by every module: the scene (hypothesis space), the
// 60 Hz observation frames, requests/sessions and the belief vector.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

namespace mmref::core {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

enum class Color { red, green, blue, yellow };
enum class Size { small, large };
enum class Shape { cube, cylinder, brick };

std::string_view to_string(Color c);
std::string_view to_string(Size s);
std::string_view to_string(Shape s);
std::optional<Color> parse_color(std::string_view s);
std::optional<Size> parse_size(std::string_view s);
std::optional<Shape> parse_shape(std::string_view s);

inline constexpr Color kAllColors[] = {Color::red, Color::green, Color::blue, Color::yellow};
inline constexpr Size kAllSizes[] = {Size::small, Size::large};
inline constexpr Shape kAllShapes[] = {Shape::cube, Shape::cylinder, Shape::brick};

struct SceneObject {
  int id = 0;
  Vec2 position = Vec2::Zero();  // meters, table frame
  Color color = Color::red;
  Size size = Size::small;
  Shape shape = Shape::cube;

  bool same_attributes(const SceneObject& other) const {
    return color == other.color && size == other.size && shape == other.shape;
  }
  bool operator==(const SceneObject&) const = default;
};

struct TableBounds {
  double min_x = -0.4;
  double min_y = -0.3;
  double max_x = 0.4;
  double max_y = 0.3;

  bool contains(const Vec2& p) const {
    return p.x() >= min_x && p.x() <= max_x && p.y() >= min_y && p.y() <= max_y;
  }
  bool operator==(const TableBounds&) const = default;
};

struct Scene {
  std::vector<SceneObject> objects;
  TableBounds table_bounds;

  std::size_t size() const { return objects.size(); }
  /// Position of the object with `id` in `objects`, if present.
  std::optional<std::size_t> index_of(int id) const;
  bool operator==(const Scene&) const = default;
};

struct ObservationFrame {
  std::int64_t timestamp_ms = 0;  // from request start
  Vec3 head = Vec3::Zero();       // roll, pitch, yaw (radians)
  bool head_fixation = false;
  std::optional<Vec3> left_dir;
  std::optional<Vec3> right_dir;
  bool left_pointing = false;
  bool right_pointing = false;
  std::string speech_text;  // cumulative recognizer hypothesis

  bool operator==(const ObservationFrame&) const = default;
};

struct Request {
  int request_id = 0;
  int target_id = 0;
  std::vector<ObservationFrame> frames;

  bool operator==(const Request&) const = default;
};

struct Session {
  int participant_id = 0;
  Scene scene;
  std::vector<Request> requests;
  std::optional<nlohmann::json> profile_meta;

  bool operator==(const Session&) const = default;
};

/// Probability vector over scene objects, indexed by position in
/// Scene::objects. Excluded entries are exactly zero and the remaining
/// entries sum to one; every constructor and mutator restores that.
class Belief {
 public:
  static Belief uniform(std::size_t n);
  /// Normalizes `weights` over non-excluded entries. Throws
  /// std::domain_error when no positive mass remains.
  static Belief from_weights(std::vector<double> weights, std::vector<bool> excluded = {});

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const { return probs_; }
  bool is_excluded(std::size_t i) const { return excluded_[i]; }
  const std::vector<bool>& excluded() const { return excluded_; }
  std::size_t active_count() const;

  /// Copy with object `i` removed from the hypothesis set.
  Belief excluding(std::size_t i) const;

  bool operator==(const Belief&) const = default;

 private:
  std::vector<double> probs_;
  std::vector<bool> excluded_;
};

/// |sum of active entries - 1|, used by normalization checks.
double normalization_error(const Belief& b);

}  // namespace mmref::core
