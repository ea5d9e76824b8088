#include "relsum/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <string>

#include "relsum/error.hpp"
#include "relsum/summarizer.hpp"
#include "relsum/text.hpp"

namespace relsum {

namespace {

using SparseVector = std::map<std::string, double, std::less<>>;

std::vector<std::size_t> order_by_score(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

std::vector<SparseVector> tfidf_vectors(const LabeledSequence& seq) {
  std::map<std::string, std::size_t, std::less<>> df;
  for (const auto& s : seq.sentences) {
    std::set<std::string_view> seen(s.tokens.begin(), s.tokens.end());
    for (auto t : seen) ++df[std::string(t)];
  }
  const double n = static_cast<double>(seq.size());
  std::vector<SparseVector> out;
  for (const auto& s : seq.sentences) {
    SparseVector v;
    for (const auto& t : s.tokens) v[t] += 1.0;
    for (auto& [t, w] : v) w *= std::log(n / static_cast<double>(df.find(t)->second));
    out.push_back(std::move(v));
  }
  return out;
}

double cosine(const SparseVector& a, const SparseVector& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [t, w] : a) {
    na += w * w;
    const auto it = b.find(t);
    if (it != b.end()) dot += w * it->second;
  }
  for (const auto& [t, w] : b) nb += w * w;
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<std::size_t> luhn_ranking(const LabeledSequence& seq, const BaselineParams& params) {
  std::map<std::string, std::size_t, std::less<>> freq;
  for (const auto& s : seq.sentences)
    for (const auto& t : s.tokens)
      if (!is_stopword(t)) ++freq[t];
  // Significant words: the top quarter of distinct content words by frequency.
  std::vector<std::size_t> counts;
  for (const auto& [t, c] : freq) counts.push_back(c);
  std::sort(counts.begin(), counts.end(), std::greater<>());
  std::size_t cutoff = std::numeric_limits<std::size_t>::max();
  if (!counts.empty()) cutoff = counts[(counts.size() + 3) / 4 - 1];
  std::vector<double> scores(seq.size(), 0.0);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const Tokens& toks = seq.sentences[i].tokens;
    std::vector<std::size_t> sig;
    for (std::size_t k = 0; k < toks.size(); ++k) {
      const auto it = freq.find(toks[k]);
      if (it != freq.end() && it->second >= cutoff) sig.push_back(k);
    }
    double best = 0.0;
    std::size_t start = 0;
    while (start < sig.size()) {
      std::size_t end = start;
      while (end + 1 < sig.size() && sig[end + 1] - sig[end] - 1 <= params.luhn_max_gap) ++end;
      const double count = static_cast<double>(end - start + 1);
      const double span = static_cast<double>(sig[end] - sig[start] + 1);
      best = std::max(best, count * count / span);
      start = end + 1;
    }
    scores[i] = best;
  }
  return order_by_score(scores);
}

std::vector<std::size_t> mmr_ranking(const LabeledSequence& seq, const BaselineParams& params) {
  const auto vectors = tfidf_vectors(seq);
  SparseVector centroid;
  for (const auto& v : vectors)
    for (const auto& [t, w] : v) centroid[t] += w / static_cast<double>(vectors.size());
  std::vector<double> relevance;
  for (const auto& v : vectors) relevance.push_back(cosine(v, centroid));
  std::vector<bool> taken(seq.size(), false);
  std::vector<double> redundancy(seq.size(), 0.0);  // max similarity to the selection
  std::vector<std::size_t> order;
  for (std::size_t step = 0; step < seq.size(); ++step) {
    std::size_t best = seq.size();
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < seq.size(); ++i) {
      if (taken[i]) continue;
      const double score = params.mmr_lambda * relevance[i] - (1.0 - params.mmr_lambda) * redundancy[i];
      if (score > best_score) {
        best_score = score;
        best = i;
      }
    }
    taken[best] = true;
    order.push_back(best);
    for (std::size_t i = 0; i < seq.size(); ++i)
      if (!taken[i]) redundancy[i] = std::max(redundancy[i], cosine(vectors[i], vectors[best]));
  }
  return order;
}

std::vector<std::size_t> sumbasic_ranking(const LabeledSequence& seq) {
  std::map<std::string, double, std::less<>> prob;
  double total = 0.0;
  for (const auto& s : seq.sentences)
    for (const auto& t : s.tokens)
      if (!is_stopword(t)) {
        prob[t] += 1.0;
        total += 1.0;
      }
  for (auto& [t, p] : prob) p /= total;
  std::vector<std::vector<std::string>> content(seq.size());
  for (std::size_t i = 0; i < seq.size(); ++i)
    for (const auto& t : seq.sentences[i].tokens)
      if (!is_stopword(t)) content[i].push_back(t);

  std::vector<bool> taken(seq.size(), false);
  std::vector<std::size_t> order;
  while (true) {
    // Highest-probability word still present in an unselected sentence.
    std::string top;
    double top_p = -1.0;
    for (std::size_t i = 0; i < seq.size(); ++i) {
      if (taken[i]) continue;
      for (const auto& t : content[i]) {
        const double p = prob[t];
        if (p > top_p || (p == top_p && t < top)) {
          top_p = p;
          top = t;
        }
      }
    }
    if (top_p < 0.0) break;
    std::size_t best = seq.size();
    double best_score = -1.0;
    for (std::size_t i = 0; i < seq.size(); ++i) {
      if (taken[i] || std::find(content[i].begin(), content[i].end(), top) == content[i].end()) continue;
      double sum = 0.0;
      for (const auto& t : content[i]) sum += prob[t];
      const double score = sum / static_cast<double>(content[i].size());
      if (score > best_score) {
        best_score = score;
        best = i;
      }
    }
    taken[best] = true;
    order.push_back(best);
    std::set<std::string_view> words(content[best].begin(), content[best].end());
    for (auto w : words) {
      double& p = prob.find(w)->second;
      p *= p;
    }
  }
  // Sentences without content words come last, in sequence order.
  for (std::size_t i = 0; i < seq.size(); ++i)
    if (!taken[i]) order.push_back(i);
  return order;
}

}  // namespace

std::string_view to_string(BaselineKind kind) noexcept {
  switch (kind) {
    case BaselineKind::luhn: return "luhn";
    case BaselineKind::mmr: return "mmr";
    case BaselineKind::lexrank: return "lexrank";
    case BaselineKind::sumbasic: return "sumbasic";
  }
  return "unknown";
}

BaselineKind parse_baseline_kind(std::string_view name) {
  for (BaselineKind k : {BaselineKind::luhn, BaselineKind::mmr, BaselineKind::lexrank, BaselineKind::sumbasic})
    if (to_string(k) == name) return k;
  throw Error(ErrorCategory::invalid_argument, "unknown baseline '" + std::string(name) + "'");
}

std::vector<std::vector<double>> tfidf_cosine_matrix(const LabeledSequence& seq) {
  const auto vectors = tfidf_vectors(seq);
  std::vector<std::vector<double>> sim(seq.size(), std::vector<double>(seq.size(), 0.0));
  for (std::size_t i = 0; i < seq.size(); ++i) {
    sim[i][i] = 1.0;
    for (std::size_t j = i + 1; j < seq.size(); ++j) sim[i][j] = sim[j][i] = cosine(vectors[i], vectors[j]);
  }
  return sim;
}

std::vector<double> lexrank_scores(const LabeledSequence& seq, const BaselineParams& params) {
  const std::size_t n = seq.size();
  const auto sim = tfidf_cosine_matrix(seq);
  std::vector<std::vector<double>> rows(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    double degree = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (sim[i][j] >= params.lexrank_threshold) {
        rows[i][j] = 1.0;
        degree += 1.0;
      }
    for (double& w : rows[i]) w /= degree;
  }
  const double dn = static_cast<double>(n);
  std::vector<double> p(n, 1.0 / dn);
  for (int iter = 0; iter < 1000; ++iter) {
    std::vector<double> next(n, (1.0 - params.lexrank_damping) / dn);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) next[j] += params.lexrank_damping * p[i] * rows[i][j];
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) change += std::abs(next[i] - p[i]);
    p = std::move(next);
    if (change < 1e-12) break;
  }
  return p;
}

std::vector<std::size_t> baseline_ranking(BaselineKind kind, const LabeledSequence& seq,
                                          const BaselineParams& params) {
  if (seq.size() == 0) throw Error(ErrorCategory::invalid_argument, "baseline needs at least one sentence");
  switch (kind) {
    case BaselineKind::luhn: return luhn_ranking(seq, params);
    case BaselineKind::mmr: return mmr_ranking(seq, params);
    case BaselineKind::lexrank: return order_by_score(lexrank_scores(seq, params));
    case BaselineKind::sumbasic: return sumbasic_ranking(seq);
  }
  throw Error(ErrorCategory::invalid_argument, "unknown baseline kind");
}

std::vector<std::size_t> fill_budget(const LabeledSequence& seq, std::span<const std::size_t> ranking,
                                     std::size_t word_budget) {
  std::vector<double> scores(seq.size(), -std::numeric_limits<double>::infinity());
  std::vector<bool> valid(seq.size(), false);
  for (std::size_t r = 0; r < ranking.size(); ++r) {
    scores[ranking[r]] = -static_cast<double>(r);
    valid[ranking[r]] = true;
  }
  std::vector<std::size_t> counts;
  for (const auto& s : seq.sentences) counts.push_back(s.tokens.size());
  return select_within_budget(scores, counts, valid, word_budget);
}

std::vector<std::size_t> baseline_summarize(BaselineKind kind, const LabeledSequence& seq,
                                            std::size_t word_budget, const BaselineParams& params) {
  return fill_budget(seq, baseline_ranking(kind, seq, params), word_budget);
}

std::vector<std::size_t> random_summarize(const LabeledSequence& seq, std::size_t word_budget, Rng& rng) {
  std::vector<std::size_t> order(seq.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);
  return fill_budget(seq, order, word_budget);
}

}  // namespace relsum
