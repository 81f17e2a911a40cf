#include "mmref/core/validate.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace mmref::core {

std::string Violation::describe() const {
  std::ostringstream out;
  out << field;
  if (request_index) out << " [request " << *request_index;
  if (frame_index) out << (request_index ? ", frame " : " [frame ") << *frame_index;
  if (request_index || frame_index) out << "]";
  out << ": " << message;
  return out.str();
}

namespace {

bool finite(const Vec3& v) { return v.allFinite(); }

}  // namespace

std::vector<Violation> validate_session(const Session& session) {
  std::vector<Violation> out;
  const Scene& scene = session.scene;

  if (scene.objects.size() < 2)
    out.push_back({"Scene.objects", {}, {}, "scene needs at least 2 objects"});

  std::set<int> ids;
  for (const auto& obj : scene.objects) {
    if (obj.id < 0) out.push_back({"SceneObject.id", {}, {}, "negative id " + std::to_string(obj.id)});
    if (!ids.insert(obj.id).second)
      out.push_back({"SceneObject.id", {}, {}, "duplicate id " + std::to_string(obj.id)});
    if (!obj.position.allFinite() || !scene.table_bounds.contains(obj.position))
      out.push_back({"SceneObject.position", {}, {},
                     "object " + std::to_string(obj.id) + " lies outside the table bounds"});
  }
  const auto& tb = scene.table_bounds;
  if (!(tb.min_x < tb.max_x) || !(tb.min_y < tb.max_y))
    out.push_back({"Scene.table_bounds", {}, {}, "empty table rectangle"});

  std::set<int> request_ids;
  for (std::size_t r = 0; r < session.requests.size(); ++r) {
    const Request& req = session.requests[r];
    const int ri = static_cast<int>(r);
    if (!request_ids.insert(req.request_id).second)
      out.push_back({"Request.request_id", ri, {}, "duplicate request id " + std::to_string(req.request_id)});
    if (!scene.index_of(req.target_id))
      out.push_back({"Request.target_id", ri, {}, "target " + std::to_string(req.target_id) + " not in scene"});
    if (req.frames.empty()) out.push_back({"Request.frames", ri, {}, "request has no frames"});

    for (std::size_t f = 0; f < req.frames.size(); ++f) {
      const ObservationFrame& fr = req.frames[f];
      if (f > 0 && fr.timestamp_ms <= req.frames[f - 1].timestamp_ms)
        out.push_back({"ObservationFrame.timestamp_ms", ri, f, "timestamps not strictly increasing"});
      if (!finite(fr.head)) out.push_back({"ObservationFrame.head", ri, f, "non-finite head angles"});
      if (fr.left_pointing && !fr.left_dir)
        out.push_back({"ObservationFrame.left_dir", ri, f, "left_pointing set without a left direction"});
      if (fr.right_pointing && !fr.right_dir)
        out.push_back({"ObservationFrame.right_dir", ri, f, "right_pointing set without a right direction"});
      if (fr.left_dir && !finite(*fr.left_dir))
        out.push_back({"ObservationFrame.left_dir", ri, f, "non-finite left direction"});
      if (fr.right_dir && !finite(*fr.right_dir))
        out.push_back({"ObservationFrame.right_dir", ri, f, "non-finite right direction"});
    }
  }
  return out;
}

}  // namespace mmref::core
