#include "relsum/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <unordered_map>

#include "relsum/error.hpp"
#include "relsum/text.hpp"

namespace relsum {

using nlohmann::json;

std::size_t CorpusRecord::resolved_reference_count() const {
  return static_cast<std::size_t>(std::count_if(references.begin(), references.end(),
                                                [](const Reference& r) { return r.resolved; }));
}

void Corpus::add(CorpusRecord record) {
  auto id = record.paper_id;
  auto [it, inserted] = records_.emplace(std::move(id), std::move(record));
  if (!inserted) {
    throw Error(ErrorCategory::duplicate_id, "duplicate paper id: " + it->first);
  }
}

void Corpus::resolve_references() {
  for (auto& [id, rec] : records_) {
    for (auto& ref : rec.references) ref.resolved = records_.count(ref.paper_id) > 0;
  }
}

const CorpusRecord* Corpus::find(std::string_view paper_id) const {
  auto it = records_.find(paper_id);
  return it == records_.end() ? nullptr : &it->second;
}

const CorpusRecord& Corpus::at(std::string_view paper_id) const {
  if (const auto* r = find(paper_id)) return *r;
  throw Error(ErrorCategory::invalid_argument, "unknown paper id: " + std::string(paper_id));
}

namespace {

bool valid_identifier(const std::string& s) {
  if (s.empty()) return false;
  return std::none_of(s.begin(), s.end(), [](unsigned char c) { return c <= 0x20 || c == 0x7f; });
}

[[noreturn]] void fail(const std::string& what) { throw Error(ErrorCategory::parse, what); }

std::vector<std::string> string_list(const json& j, const char* key) {
  std::vector<std::string> out;
  if (!j.contains(key)) return out;
  const auto& arr = j.at(key);
  if (!arr.is_array()) fail(std::string(key) + " must be a list");
  for (const auto& v : arr) {
    if (!v.is_string()) fail(std::string(key) + " entries must be strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::string optional_string(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return {};
  if (!j.at(key).is_string()) fail(std::string(key) + " must be a string");
  return j.at(key).get<std::string>();
}

int count_field(const json& v, const char* what) {
  if (!v.is_number_integer()) fail(std::string(what) + " must be an integer");
  const auto n = v.get<long long>();
  if (n < 0) fail(std::string(what) + " must be non-negative");
  return static_cast<int>(n);
}

}  // namespace

CorpusRecord parse_record(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    fail(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) fail("record must be a JSON object");

  CorpusRecord rec;
  if (!j.contains("id") || !j.at("id").is_string()) fail("missing string field id");
  rec.paper_id = j.at("id").get<std::string>();
  if (!valid_identifier(rec.paper_id)) fail("id must be non-empty without whitespace");
  if (!j.contains("year") || !j.at("year").is_number_integer()) fail("missing integer field year");
  rec.year = j.at("year").get<int>();
  rec.title = optional_string(j, "title");
  rec.venue = optional_string(j, "venue");
  if (!rec.venue.empty() && !valid_identifier(rec.venue)) fail("venue must not contain whitespace");
  rec.related_work_text = optional_string(j, "related_work");
  rec.authors = string_list(j, "authors");
  rec.keywords = string_list(j, "keywords");
  for (const auto& a : rec.authors) {
    if (!valid_identifier(a)) fail("author ids must be non-empty without whitespace");
  }
  for (const auto& k : rec.keywords) {
    if (!valid_identifier(k)) fail("keyword ids must be non-empty without whitespace");
  }
  rec.abstract_sentences = string_list(j, "abstract");

  if (j.contains("body")) {
    const auto& body = j.at("body");
    if (!body.is_array()) fail("body must be a list");
    for (const auto& entry : body) {
      if (!entry.is_array() || entry.size() != 2 || !entry[0].is_string() || !entry[1].is_string()) {
        fail("body entries must be [section, text]");
      }
      rec.body_sentences.push_back({entry[0].get<std::string>(), entry[1].get<std::string>()});
    }
  }

  if (j.contains("refs")) {
    const auto& refs = j.at("refs");
    if (!refs.is_array()) fail("refs must be a list");
    std::set<std::string> seen;
    for (const auto& entry : refs) {
      if (!entry.is_array() || entry.size() != 3 || !entry[0].is_string()) {
        fail("refs entries must be [id, rw_count, full_count]");
      }
      Reference r;
      r.paper_id = entry[0].get<std::string>();
      if (!valid_identifier(r.paper_id)) fail("reference ids must be non-empty without whitespace");
      if (r.paper_id == rec.paper_id) fail("record cites itself");
      if (!seen.insert(r.paper_id).second) fail("reference listed twice: " + r.paper_id);
      r.cited_in_related_work = count_field(entry[1], "rw_count");
      r.cited_in_full_paper = count_field(entry[2], "full_count");
      rec.references.push_back(std::move(r));
    }
  }
  return rec;
}

std::string serialize_record(const CorpusRecord& rec) {
  json j;
  j["id"] = rec.paper_id;
  j["title"] = rec.title;
  j["year"] = rec.year;
  j["authors"] = rec.authors;
  j["keywords"] = rec.keywords;
  j["venue"] = rec.venue;
  j["abstract"] = rec.abstract_sentences;
  json body = json::array();
  for (const auto& b : rec.body_sentences) body.push_back({b.section, b.text});
  j["body"] = std::move(body);
  json refs = json::array();
  for (const auto& r : rec.references) {
    refs.push_back({r.paper_id, r.cited_in_related_work, r.cited_in_full_paper});
  }
  j["refs"] = std::move(refs);
  j["related_work"] = rec.related_work_text;
  return j.dump();
}

IngestResult ingest_corpus(std::istream& in) {
  IngestResult result;
  std::string line;
  std::size_t line_no = 0;
  std::map<std::string, std::size_t> first_seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    CorpusRecord rec;
    try {
      rec = parse_record(line);
    } catch (const Error& e) {
      result.issues.push_back({line_no, e.what()});
      continue;
    }
    if (auto it = first_seen.find(rec.paper_id); it != first_seen.end()) {
      throw Error(ErrorCategory::duplicate_id,
                  "line " + std::to_string(line_no) + ": duplicate paper id " + rec.paper_id +
                      " (first seen on line " + std::to_string(it->second) + ")");
    }
    first_seen.emplace(rec.paper_id, line_no);
    result.corpus.add(std::move(rec));
  }
  result.corpus.resolve_references();
  return result;
}

IngestResult ingest_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::io, "cannot open corpus file " + path.string());
  return ingest_corpus(in);
}

std::optional<Sentence> preprocess_sentence(std::string_view raw, std::string_view source,
                                            std::size_t position) {
  auto tokens = normalize(raw);
  if (tokens.size() < kMinSentenceTokens || tokens.size() > kMaxSentenceTokens) {
    return std::nullopt;
  }
  return Sentence{std::move(tokens), std::string(source), position};
}

std::vector<Sentence> document_sentences(const CorpusRecord& record) {
  std::vector<Sentence> out;
  std::size_t position = 0;
  for (const auto& s : record.abstract_sentences) {
    if (auto sent = preprocess_sentence(s, record.paper_id, position)) out.push_back(std::move(*sent));
    ++position;
  }
  for (const auto& b : record.body_sentences) {
    if (auto sent = preprocess_sentence(b.text, record.paper_id, position)) {
      out.push_back(std::move(*sent));
    }
    ++position;
  }
  return out;
}

std::vector<std::string> order_references(const CorpusRecord& target) {
  std::vector<const Reference*> refs;
  for (const auto& r : target.references) {
    if (r.resolved) refs.push_back(&r);
  }
  if (refs.empty()) {
    throw Error(ErrorCategory::unusable_target,
                "target " + target.paper_id + " has no resolved references");
  }
  std::stable_sort(refs.begin(), refs.end(), [](const Reference* a, const Reference* b) {
    if (a->cited_in_related_work != b->cited_in_related_work) {
      return a->cited_in_related_work > b->cited_in_related_work;
    }
    if (a->cited_in_full_paper != b->cited_in_full_paper) {
      return a->cited_in_full_paper > b->cited_in_full_paper;
    }
    return a->paper_id < b->paper_id;
  });
  std::vector<std::string> ids;
  ids.reserve(refs.size());
  for (const auto* r : refs) ids.push_back(r->paper_id);
  return ids;
}

LabeledSequence build_candidate_sequence(const CorpusRecord& target, const Corpus& corpus) {
  LabeledSequence seq;
  for (const auto& id : order_references(target)) {
    auto sentences = document_sentences(corpus.at(id));
    if (sentences.empty()) continue;
    const std::size_t begin = seq.sentences.size();
    for (auto& s : sentences) seq.sentences.push_back(std::move(s));
    seq.boundaries.push_back({id, begin, seq.sentences.size()});
  }
  if (seq.sentences.empty()) {
    throw Error(ErrorCategory::unusable_target,
                "target " + target.paper_id + " has no acceptable candidate sentences");
  }
  return seq;
}

std::size_t default_max_positives(const LabeledSequence& seq, std::size_t gold_token_count) {
  if (seq.sentences.empty()) return 1;
  std::size_t total = 0;
  for (const auto& s : seq.sentences) total += s.tokens.size();
  const double mean = static_cast<double>(total) / static_cast<double>(seq.sentences.size());
  const auto budget = static_cast<std::size_t>(std::ceil(static_cast<double>(gold_token_count) / mean));
  return std::max<std::size_t>(1, budget);
}

namespace {

using BigramKey = std::string;

BigramKey bigram_key(const std::string& a, const std::string& b) {
  BigramKey k;
  k.reserve(a.size() + b.size() + 1);
  k.append(a).push_back('\x1f');
  k.append(b);
  return k;
}

std::unordered_map<BigramKey, int> bigram_bag(std::span<const std::string> tokens) {
  std::unordered_map<BigramKey, int> bag;
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) ++bag[bigram_key(tokens[i], tokens[i + 1])];
  return bag;
}

// Sorted so that gain sums are evaluated in a fixed order.
using BigramList = std::vector<std::pair<BigramKey, int>>;

BigramList sorted_bag(std::span<const std::string> tokens) {
  auto bag = bigram_bag(tokens);
  BigramList list(bag.begin(), bag.end());
  std::sort(list.begin(), list.end());
  return list;
}

}  // namespace

double selection_rouge2_recall(const LabeledSequence& seq, std::span<const std::size_t> selected,
                               std::span<const std::string> gold_tokens) {
  const auto gold = bigram_bag(gold_tokens);
  long total = 0;
  for (const auto& [k, c] : gold) total += c;
  if (total == 0) return 0.0;
  std::unordered_map<BigramKey, int> have;
  for (auto idx : selected) {
    for (const auto& [k, c] : bigram_bag(seq.sentences.at(idx).tokens)) have[k] += c;
  }
  long overlap = 0;
  for (const auto& [k, c] : gold) {
    if (auto it = have.find(k); it != have.end()) overlap += std::min(c, it->second);
  }
  return static_cast<double>(overlap) / static_cast<double>(total);
}

OracleOutcome label_oracle(LabeledSequence seq, std::span<const std::string> gold_tokens,
                           std::size_t max_positives) {
  if (max_positives == 0) throw Error(ErrorCategory::invalid_argument, "max_positives must be >= 1");
  const auto gold = bigram_bag(gold_tokens);
  if (gold.empty()) throw Error(ErrorCategory::invalid_argument, "gold standard has no bigrams");
  long gold_total = 0;
  for (const auto& [k, c] : gold) gold_total += c;

  const std::size_t m = seq.sentences.size();
  std::vector<BigramList> bags;
  bags.reserve(m);
  for (const auto& s : seq.sentences) bags.push_back(sorted_bag(s.tokens));

  std::unordered_map<BigramKey, int> have;
  std::vector<bool> chosen(m, false);
  seq.labels.assign(m, 0);
  long overlap = 0;
  std::size_t picked = 0;

  while (picked < max_positives) {
    long best_gain = 0;
    std::size_t best = m;
    for (std::size_t i = 0; i < m; ++i) {
      if (chosen[i]) continue;
      long gain = 0;
      for (const auto& [k, c] : bags[i]) {
        auto g = gold.find(k);
        if (g == gold.end()) continue;
        auto h = have.find(k);
        const int cur = h == have.end() ? 0 : h->second;
        gain += std::min(cur + c, g->second) - std::min(cur, g->second);
      }
      if (gain > best_gain) {
        best_gain = gain;
        best = i;
      }
    }
    if (best == m) break;
    chosen[best] = true;
    seq.labels[best] = 1;
    for (const auto& [k, c] : bags[best]) have[k] += c;
    overlap += best_gain;
    ++picked;
  }

  OracleOutcome out;
  out.no_overlap = picked == 0;
  out.rouge2_recall = static_cast<double>(overlap) / static_cast<double>(gold_total);
  out.sequence = std::move(seq);
  return out;
}

OracleOutcome label_oracle(LabeledSequence seq, std::string_view gold_text,
                           std::size_t max_positives) {
  const auto gold = normalize(gold_text);
  return label_oracle(std::move(seq), gold, max_positives);
}

bool EligibilityCriteria::operator()(const CorpusRecord& record) const {
  if (record.resolved_reference_count() < min_resolved_references) return false;
  return tokenize(record.related_work_text).size() >= min_gold_words;
}

}  // namespace relsum
