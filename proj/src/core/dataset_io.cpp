#include "mmref/core/dataset_io.hpp"

#include <fstream>
#include <sstream>

namespace mmref::core {

using nlohmann::json;

namespace {

const json& require(const json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end()) throw std::invalid_argument(std::string("missing required field '") + field + "'");
  return *it;
}

template <typename T>
T require_as(const json& j, const char* field) {
  const json& v = require(j, field);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument(std::string("field '") + field + "' has the wrong type");
  }
}

Vec3 require_vec3(const json& j, const char* field) {
  try {
    return vec3_from_json(require(j, field));
  } catch (const json::exception&) {
    throw std::invalid_argument(std::string("field '") + field + "' is not a 3-vector");
  }
}

}  // namespace

json to_json(const Vec2& v) { return json::array({v.x(), v.y()}); }
json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec2 vec2_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("expected a 2-element array");
  return Vec2(j[0].get<double>(), j[1].get<double>());
}

Vec3 vec3_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("expected a 3-element array");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json scene_to_json(const Scene& scene) {
  json objects = json::array();
  for (const auto& o : scene.objects) {
    objects.push_back({{"id", o.id},
                       {"position", to_json(o.position)},
                       {"color", to_string(o.color)},
                       {"size", to_string(o.size)},
                       {"shape", to_string(o.shape)}});
  }
  const auto& b = scene.table_bounds;
  return {{"objects", std::move(objects)},
          {"table_bounds", {{"min_x", b.min_x}, {"min_y", b.min_y}, {"max_x", b.max_x}, {"max_y", b.max_y}}}};
}

Scene scene_from_json(const json& j) {
  Scene scene;
  for (const auto& o : require(j, "objects")) {
    SceneObject obj;
    obj.id = require_as<int>(o, "id");
    obj.position = vec2_from_json(require(o, "position"));
    auto color = parse_color(require_as<std::string>(o, "color"));
    auto size = parse_size(require_as<std::string>(o, "size"));
    auto shape = parse_shape(require_as<std::string>(o, "shape"));
    if (!color) throw std::invalid_argument("unknown color token in field 'color'");
    if (!size) throw std::invalid_argument("unknown size token in field 'size'");
    if (!shape) throw std::invalid_argument("unknown shape token in field 'shape'");
    obj.color = *color;
    obj.size = *size;
    obj.shape = *shape;
    scene.objects.push_back(obj);
  }
  const json& b = require(j, "table_bounds");
  scene.table_bounds = {require_as<double>(b, "min_x"), require_as<double>(b, "min_y"),
                        require_as<double>(b, "max_x"), require_as<double>(b, "max_y")};
  return scene;
}

json frame_to_json(const ObservationFrame& f) {
  json j = {{"timestamp_ms", f.timestamp_ms},
            {"head", to_json(f.head)},
            {"head_fixation", f.head_fixation},
            {"left_pointing", f.left_pointing},
            {"right_pointing", f.right_pointing},
            {"speech_text", f.speech_text}};
  if (f.left_dir) j["left_dir"] = to_json(*f.left_dir);
  if (f.right_dir) j["right_dir"] = to_json(*f.right_dir);
  return j;
}

ObservationFrame frame_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("frame is not a JSON object");
  ObservationFrame f;
  f.timestamp_ms = require_as<std::int64_t>(j, "timestamp_ms");
  f.head = require_vec3(j, "head");
  f.head_fixation = require_as<bool>(j, "head_fixation");
  f.left_pointing = require_as<bool>(j, "left_pointing");
  f.right_pointing = require_as<bool>(j, "right_pointing");
  f.speech_text = require_as<std::string>(j, "speech_text");
  if (j.contains("left_dir")) f.left_dir = require_vec3(j, "left_dir");
  if (j.contains("right_dir")) f.right_dir = require_vec3(j, "right_dir");
  return f;
}

void write_json_line(std::ostream& out, const json& j) {
  out << j.dump() << '\n';
}

void write_sessions(std::ostream& out, const std::vector<Session>& sessions) {
  for (const auto& s : sessions) {
    json header = {{"participant_id", s.participant_id}, {"scene", scene_to_json(s.scene)}};
    if (s.profile_meta) header["profile_meta"] = *s.profile_meta;
    write_json_line(out, header);
    for (const auto& r : s.requests) {
      write_json_line(out, {{"request_id", r.request_id}, {"target_id", r.target_id}});
      for (const auto& f : r.frames) write_json_line(out, frame_to_json(f));
    }
  }
}

std::vector<Session> read_sessions(std::istream& in) {
  std::vector<Session> sessions;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DatasetError(line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw DatasetError(line_no, "expected a JSON object");

    try {
      if (j.contains("participant_id")) {
        Session s;
        s.participant_id = require_as<int>(j, "participant_id");
        s.scene = scene_from_json(require(j, "scene"));
        if (j.contains("profile_meta")) s.profile_meta = j.at("profile_meta");
        sessions.push_back(std::move(s));
      } else if (j.contains("request_id")) {
        if (sessions.empty()) throw std::invalid_argument("request header before any session header");
        Request r;
        r.request_id = require_as<int>(j, "request_id");
        r.target_id = require_as<int>(j, "target_id");
        sessions.back().requests.push_back(std::move(r));
      } else {
        if (sessions.empty() || sessions.back().requests.empty())
          throw std::invalid_argument("frame line outside of a request");
        sessions.back().requests.back().frames.push_back(frame_from_json(j));
      }
    } catch (const DatasetError&) {
      throw;
    } catch (const std::exception& e) {
      throw DatasetError(line_no, e.what());
    }
  }
  return sessions;
}

void save_sessions(const std::vector<Session>& sessions, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_sessions(out, sessions);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<Session> load_sessions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string() + " for reading");
  return read_sessions(in);
}

}  // namespace mmref::core
