#include "relsum/rouge.hpp"

#include <algorithm>

#include "relsum/error.hpp"

namespace relsum {

RougeScore RougeScore::from_counts(double overlap, double reference_total,
                                   double candidate_total) {
  RougeScore s;
  s.recall = reference_total > 0 ? overlap / reference_total : 0.0;
  s.precision = candidate_total > 0 ? overlap / candidate_total : 0.0;
  const double denom = s.precision + s.recall;
  s.f1 = denom > 0 ? 2.0 * s.precision * s.recall / denom : 0.0;
  return s;
}

NgramCounts count_ngrams(std::span<const std::string> tokens, int n) {
  NgramCounts counts;
  if (n <= 0 || tokens.size() < static_cast<std::size_t>(n)) return counts;
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i) + n)];
  }
  return counts;
}

Tokens truncate_to_bytes(std::span<const std::string> tokens, std::size_t byte_limit) {
  Tokens out;
  std::size_t used = 0;
  for (const auto& t : tokens) {
    const std::size_t need = t.size() + (out.empty() ? 0 : 1);
    if (used + need > byte_limit) break;
    used += need;
    out.push_back(t);
  }
  return out;
}

namespace {

Tokens prepare_reference(std::span<const std::string> reference,
                         std::optional<std::size_t> byte_limit) {
  Tokens ref = byte_limit ? truncate_to_bytes(reference, *byte_limit)
                          : Tokens(reference.begin(), reference.end());
  if (ref.empty()) {
    throw Error(ErrorCategory::invalid_argument, "reference is empty after truncation");
  }
  return ref;
}

}  // namespace

RougeScore rouge_n(std::span<const std::string> candidate,
                   std::span<const std::string> reference, int n,
                   std::optional<std::size_t> byte_limit) {
  if (n != 1 && n != 2) throw Error(ErrorCategory::invalid_argument, "rouge_n supports n in {1,2}");
  const Tokens ref = prepare_reference(reference, byte_limit);
  const auto ref_counts = count_ngrams(ref, n);
  const auto cand_counts = count_ngrams(candidate, n);

  double overlap = 0;
  double ref_total = 0;
  double cand_total = 0;
  for (const auto& [gram, c] : ref_counts) {
    ref_total += c;
    if (auto it = cand_counts.find(gram); it != cand_counts.end()) {
      overlap += std::min(c, it->second);
    }
  }
  for (const auto& [gram, c] : cand_counts) cand_total += c;
  return RougeScore::from_counts(overlap, ref_total, cand_total);
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

RougeScore rouge_l(std::span<const std::string> candidate,
                   std::span<const std::string> reference,
                   std::optional<std::size_t> byte_limit) {
  const Tokens ref = prepare_reference(reference, byte_limit);
  const auto l = static_cast<double>(lcs_length(candidate, ref));
  return RougeScore::from_counts(l, static_cast<double>(ref.size()),
                                 static_cast<double>(candidate.size()));
}

}  // namespace relsum
