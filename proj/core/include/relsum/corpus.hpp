#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "relsum/rouge.hpp"

namespace relsum {

struct Reference {
  std::string paper_id;
  int cited_in_related_work = 0;
  int cited_in_full_paper = 0;
  bool resolved = false;  // set by ingestion: the cited paper is in the corpus
};

struct BodySentence {
  std::string section;
  std::string text;
};

struct CorpusRecord {
  std::string paper_id;
  std::string title;
  int year = 0;
  std::vector<std::string> authors;
  std::vector<std::string> keywords;
  std::string venue;
  std::vector<std::string> abstract_sentences;
  std::vector<BodySentence> body_sentences;
  std::vector<Reference> references;
  std::string related_work_text;

  std::size_t resolved_reference_count() const;
};

/// Immutable after ingestion; ordered by paper id.
class Corpus {
 public:
  Corpus() = default;

  /// Throws Error(duplicate_id) when the id is already present.
  void add(CorpusRecord record);
  /// Recomputes Reference::resolved for every record.
  void resolve_references();

  const CorpusRecord* find(std::string_view paper_id) const;
  const CorpusRecord& at(std::string_view paper_id) const;
  bool contains(std::string_view paper_id) const { return find(paper_id) != nullptr; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  auto begin() const { return records_.begin(); }
  auto end() const { return records_.end(); }

 private:
  std::map<std::string, CorpusRecord, std::less<>> records_;
};

struct IngestIssue {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct IngestResult {
  Corpus corpus;
  std::vector<IngestIssue> issues;
};

/// One JSON object per line with keys id, title, year, authors, keywords,
/// venue, abstract, body ([section, text] pairs), refs ([id, rw, full]
/// triples) and related_work. Malformed lines are reported and skipped;
/// a duplicate id aborts with Error(duplicate_id).
IngestResult ingest_corpus(const std::filesystem::path& path);
IngestResult ingest_corpus(std::istream& in);

/// Parses a single corpus line. Throws Error(parse) on malformed input.
CorpusRecord parse_record(std::string_view line);
/// Canonical one-line serialization accepted by parse_record.
std::string serialize_record(const CorpusRecord& record);

inline constexpr std::size_t kMinSentenceTokens = 7;
inline constexpr std::size_t kMaxSentenceTokens = 80;

struct Sentence {
  Tokens tokens;
  std::string source_doc;
  std::size_t position = 0;  // index of the raw sentence within its document
};

/// Lowercase + stem + length filter. nullopt means the sentence was rejected.
std::optional<Sentence> preprocess_sentence(std::string_view raw, std::string_view source,
                                            std::size_t position);

/// Accepted sentences of a document: abstract first, then body, in order.
std::vector<Sentence> document_sentences(const CorpusRecord& record);

/// Resolved references sorted by (related-work count desc, full-paper count
/// desc, id asc). Throws Error(unusable_target) when none are resolved.
std::vector<std::string> order_references(const CorpusRecord& target);

struct DocumentSpan {
  std::string paper_id;
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive

  bool operator==(const DocumentSpan&) const = default;
};

struct LabeledSequence {
  std::vector<Sentence> sentences;
  std::vector<int> labels;  // parallel to `sentences`; empty until labelled
  std::vector<DocumentSpan> boundaries;

  std::size_t size() const { return sentences.size(); }
};

/// Concatenates the accepted sentences of every resolved reference in the
/// order given by order_references. References contributing nothing are
/// omitted from `boundaries`. Throws Error(unusable_target) if empty.
LabeledSequence build_candidate_sequence(const CorpusRecord& target, const Corpus& corpus);

/// ceil(gold tokens / mean candidate sentence length), at least 1.
std::size_t default_max_positives(const LabeledSequence& seq, std::size_t gold_token_count);

struct OracleOutcome {
  LabeledSequence sequence;
  double rouge2_recall = 0.0;
  bool no_overlap = false;  // gold shares no bigram with any candidate
};

/// Greedy ROUGE-2 recall maximisation. Each step adds the unselected
/// sentence with the largest marginal gain (lowest index on ties) and stops
/// when nothing improves or `max_positives` sentences are chosen.
OracleOutcome label_oracle(LabeledSequence seq, std::span<const std::string> gold_tokens,
                           std::size_t max_positives);
OracleOutcome label_oracle(LabeledSequence seq, std::string_view gold_text,
                           std::size_t max_positives);

/// ROUGE-2 recall of a set of candidate sentences against gold. Bigrams are
/// counted within sentences, never across a sentence boundary.
double selection_rouge2_recall(const LabeledSequence& seq, std::span<const std::size_t> selected,
                               std::span<const std::string> gold_tokens);

struct EligibilityCriteria {
  std::size_t min_resolved_references = 15;
  std::size_t min_gold_words = 500;

  bool operator()(const CorpusRecord& record) const;
};

}  // namespace relsum
