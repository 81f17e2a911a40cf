#pragma once

// JSON Lines dataset format. A file is a sequence of sessions; each session
// starts with a header line carrying `participant_id` and `scene`, each
// request with a line carrying `request_id` and `target_id`, and every other
// line is one ObservationFrame of the current request.

#include <cstddef>
#include <filesystem>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmref/core/types.hpp"

namespace mmref::core {

class DatasetError : public std::runtime_error {
 public:
  DatasetError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

nlohmann::json to_json(const Vec2& v);
nlohmann::json to_json(const Vec3& v);
Vec2 vec2_from_json(const nlohmann::json& j);
Vec3 vec3_from_json(const nlohmann::json& j);

nlohmann::json scene_to_json(const Scene& scene);
Scene scene_from_json(const nlohmann::json& j);
nlohmann::json frame_to_json(const ObservationFrame& frame);
/// Throws std::invalid_argument naming the first missing or mistyped field.
ObservationFrame frame_from_json(const nlohmann::json& j);

void write_sessions(std::ostream& out, const std::vector<Session>& sessions);
std::vector<Session> read_sessions(std::istream& in);

void save_sessions(const std::vector<Session>& sessions, const std::filesystem::path& path);
std::vector<Session> load_sessions(const std::filesystem::path& path);

/// Streams one line of compact JSON. Shared by the other JSONL writers.
void write_json_line(std::ostream& out, const nlohmann::json& j);

}  // namespace mmref::core
