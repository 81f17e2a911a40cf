#include "mmref/observation/lexicon.hpp"

#include <stdexcept>

namespace mmref::observation {

std::string_view to_string(SpeechKind k) {
  switch (k) {
    case SpeechKind::attribute: return "attribute";
    case SpeechKind::deictic: return "deictic";
    case SpeechKind::other: return "other";
    case SpeechKind::request_onset: return "request_onset";
  }
  return "?";
}

std::optional<SpeechKind> parse_speech_kind(std::string_view s) {
  for (auto k : {SpeechKind::attribute, SpeechKind::deictic, SpeechKind::other, SpeechKind::request_onset})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

KeywordLexicon KeywordLexicon::standard() {
  KeywordLexicon lex;
  for (auto c : core::kAllColors) lex.attribute_words[std::string(core::to_string(c))] = "color:" + std::string(core::to_string(c));
  for (auto s : core::kAllSizes) lex.attribute_words[std::string(core::to_string(s))] = "size:" + std::string(core::to_string(s));
  for (auto s : core::kAllShapes) lex.attribute_words[std::string(core::to_string(s))] = "shape:" + std::string(core::to_string(s));
  lex.attribute_words["big"] = "size:large";
  lex.attribute_words["little"] = "size:small";
  lex.deictic_words = {"here", "there", "this", "that", "these", "those"};
  return lex;
}

void KeywordLexicon::check() const {
  if (!(smoothing_alpha > 0)) throw std::invalid_argument("lexicon smoothing_alpha must be > 0");
  for (const auto& w : deictic_words)
    if (attribute_words.count(w)) throw std::invalid_argument("word '" + w + "' is both attribute and deictic");
}

SpeechKind classify_word(std::string_view word, const KeywordLexicon& lexicon) {
  const std::string w(word);
  if (lexicon.attribute_words.count(w)) return SpeechKind::attribute;
  if (lexicon.deictic_words.count(w)) return SpeechKind::deictic;
  return SpeechKind::other;
}

bool has_attribute(const core::SceneObject& obj, std::string_view token) {
  const auto colon = token.find(':');
  if (colon == std::string_view::npos) return false;
  const auto kind = token.substr(0, colon);
  const auto value = token.substr(colon + 1);
  if (kind == "color") return core::to_string(obj.color) == value;
  if (kind == "size") return core::to_string(obj.size) == value;
  if (kind == "shape") return core::to_string(obj.shape) == value;
  return false;
}

nlohmann::json lexicon_to_json(const KeywordLexicon& lex) {
  return {{"attribute_words", lex.attribute_words},
          {"deictic_words", lex.deictic_words},
          {"smoothing_alpha", lex.smoothing_alpha}};
}

KeywordLexicon lexicon_from_json(const nlohmann::json& j) {
  KeywordLexicon lex;
  lex.attribute_words = j.at("attribute_words").get<std::map<std::string, std::string>>();
  lex.deictic_words = j.at("deictic_words").get<std::set<std::string>>();
  if (j.contains("smoothing_alpha")) lex.smoothing_alpha = j.at("smoothing_alpha").get<double>();
  lex.check();
  return lex;
}

}  // namespace mmref::observation
