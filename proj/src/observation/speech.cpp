#include "mmref/observation/speech.hpp"

#include <cctype>

namespace mmref::observation {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> words;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || ch == '\'') {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      words.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

SpeechDiff diff_speech(std::string_view previous, std::string_view current) {
  const auto prev = tokenize(previous);
  auto cur = tokenize(current);
  std::size_t lcp = 0;
  while (lcp < prev.size() && lcp < cur.size() && prev[lcp] == cur[lcp]) ++lcp;

  SpeechDiff diff;
  diff.request_onset = prev.empty() && !cur.empty();
  diff.new_words.assign(std::make_move_iterator(cur.begin() + static_cast<std::ptrdiff_t>(lcp)),
                        std::make_move_iterator(cur.end()));
  return diff;
}

}  // namespace mmref::observation
