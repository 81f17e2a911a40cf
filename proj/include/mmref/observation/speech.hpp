#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mmref::observation {

/// Lowercases and splits on anything that is not a letter, digit or apostrophe.
std::vector<std::string> tokenize(std::string_view text);

struct SpeechDiff {
  std::vector<std::string> new_words;
  bool request_onset = false;
};

/// Words of `current` past the longest common word prefix with `previous`.
/// A revised word is therefore re-emitted. request_onset is set on the first
/// non-empty hypothesis of a request.
SpeechDiff diff_speech(std::string_view previous, std::string_view current);

}  // namespace mmref::observation
