#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace relsum {

/// Lowercases ASCII letters, drops punctuation (hyphens survive only between
/// two word characters), and splits on whitespace.
std::vector<std::string> tokenize(std::string_view raw);

/// Porter (1980) suffix-stripping stemmer. Input is expected lowercase;
/// tokens that are not purely ASCII letters are returned unchanged.
std::string porter_stem(std::string_view word);

/// tokenize followed by porter_stem on every token.
std::vector<std::string> normalize(std::string_view raw);

/// Stemmed English function words, used by the frequency-based baselines.
bool is_stopword(std::string_view stemmed_token);

}  // namespace relsum
