#include "relsum/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace relsum {
namespace {

bool is_word_char(unsigned char c) {
  return std::isalnum(c) != 0 || c >= 0x80;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view raw) {
  std::string cleaned;
  cleaned.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto c = static_cast<unsigned char>(raw[i]);
    if (is_word_char(c)) {
      cleaned.push_back(static_cast<char>(std::tolower(c)));
    } else if (c == '-' && i > 0 && i + 1 < raw.size() &&
               is_word_char(static_cast<unsigned char>(raw[i - 1])) &&
               is_word_char(static_cast<unsigned char>(raw[i + 1]))) {
      cleaned.push_back('-');
    } else if (std::isspace(c) != 0) {
      cleaned.push_back(' ');
    } else {
      // Punctuation is removed, not turned into a separator ("don't" -> "dont").
    }
  }

  std::vector<std::string> tokens;
  std::size_t pos = 0;
  while (pos < cleaned.size()) {
    while (pos < cleaned.size() && cleaned[pos] == ' ') ++pos;
    std::size_t end = pos;
    while (end < cleaned.size() && cleaned[end] != ' ') ++end;
    if (end > pos) tokens.emplace_back(cleaned.substr(pos, end - pos));
    pos = end;
  }
  return tokens;
}

std::vector<std::string> normalize(std::string_view raw) {
  auto tokens = tokenize(raw);
  for (auto& t : tokens) t = porter_stem(t);
  return tokens;
}

bool is_stopword(std::string_view token) {
  // Porter-stemmed forms of a standard English stopword list, kept sorted.
  static constexpr auto kStop = std::to_array<std::string_view>({
      "a",     "about", "abov",  "after", "again", "against", "all",   "also",
      "am",    "an",    "and",   "ani",   "ar",    "are",     "as",    "at",
      "be",    "becaus", "been", "befor", "below", "between", "both",  "but",
      "by",    "can",   "could", "did",   "do",    "doe",     "down",  "dure",
      "each",  "few",   "for",   "from",  "further", "had",   "ha",    "has",
      "have",  "he",    "her",   "here",  "hi",    "him",     "how",   "i",
      "if",    "in",    "into",  "is",    "it",    "itself",  "just",  "me",
      "more",  "most",  "my",    "no",    "nor",   "not",     "now",   "of",
      "off",   "on",    "onc",   "onli",  "or",    "other",   "our",   "out",
      "over",  "own",   "same",  "she",   "should", "so",     "some",  "such",
      "than",  "that",  "the",   "their", "them",  "then",    "there", "these",
      "thei",  "thi",   "those", "through", "to",  "too",     "under", "until",
      "up",    "veri",  "wa",    "we",    "were",  "what",    "when",  "where",
      "which", "while", "who",   "whom",  "why",   "will",    "with",  "would",
      "you",   "your",  "yourself",
  });
  static const auto sorted = [] {
    std::array<std::string_view, kStop.size()> copy = kStop;
    std::sort(copy.begin(), copy.end());
    return copy;
  }();
  return std::binary_search(sorted.begin(), sorted.end(), token);
}

}  // namespace relsum
