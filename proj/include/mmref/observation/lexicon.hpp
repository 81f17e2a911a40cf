#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "mmref/core/types.hpp"

namespace mmref::observation {

enum class SpeechKind { attribute, deictic, other, request_onset };

std::string_view to_string(SpeechKind k);
std::optional<SpeechKind> parse_speech_kind(std::string_view s);

/// Keyword dictionaries used to classify recognized words. Attribute words
/// map to tokens of the form "color:red", "size:small" or "shape:cube".
struct KeywordLexicon {
  std::map<std::string, std::string> attribute_words;
  std::set<std::string> deictic_words;
  double smoothing_alpha = 0.1;

  /// Colors, sizes and shapes of the block set plus the common deictics.
  static KeywordLexicon standard();

  /// Throws std::invalid_argument when the dictionaries overlap or alpha <= 0.
  void check() const;
};

SpeechKind classify_word(std::string_view word, const KeywordLexicon& lexicon);

/// True when `obj` carries the attribute named by `token`.
bool has_attribute(const core::SceneObject& obj, std::string_view token);

nlohmann::json lexicon_to_json(const KeywordLexicon& lex);
KeywordLexicon lexicon_from_json(const nlohmann::json& j);

}  // namespace mmref::observation
