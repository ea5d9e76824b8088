#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace relsum {

struct RougeScore {
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;

  static RougeScore from_counts(double overlap, double reference_total, double candidate_total);
};

using Tokens = std::vector<std::string>;
using NgramCounts = std::map<std::vector<std::string>, int>;

NgramCounts count_ngrams(std::span<const std::string> tokens, int n);

/// Longest prefix of whole tokens whose space-joined byte length fits the limit.
Tokens truncate_to_bytes(std::span<const std::string> tokens, std::size_t byte_limit);

/// Clipped n-gram overlap for n in {1, 2}. The reference (not the candidate)
/// is truncated to `byte_limit` bytes when a limit is given.
RougeScore rouge_n(std::span<const std::string> candidate,
                   std::span<const std::string> reference, int n,
                   std::optional<std::size_t> byte_limit = std::nullopt);

RougeScore rouge_l(std::span<const std::string> candidate,
                   std::span<const std::string> reference,
                   std::optional<std::size_t> byte_limit = std::nullopt);

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

}  // namespace relsum
