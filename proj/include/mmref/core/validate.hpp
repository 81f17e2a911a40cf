#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mmref/core/types.hpp"

namespace mmref::core {

struct Violation {
  std::string field;                    // e.g. "SceneObject.id"
  std::optional<int> request_index;     // position in Session::requests
  std::optional<std::size_t> frame_index;
  std::string message;

  std::string describe() const;
};

/// Checks every type invariant of a session. Violations are data: the
/// returned list is empty iff the session is well formed.
std::vector<Violation> validate_session(const Session& session);

}  // namespace mmref::core
