#include "relsum/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <string_view>

#include "relsum/rng.hpp"

namespace relsum {

namespace {

using WordList = std::vector<std::string_view>;

const std::array<WordList, 4> kTopicWords = {{
    {"query", "document", "ranking", "index", "relevance", "search", "click", "engine",
     "retrieval", "snippet", "crawler", "precision", "feedback", "expansion", "collection",
     "judgment", "lexical", "inverted", "posting", "browsing", "session", "navigational",
     "freshness", "corpus"},
    {"image", "pixel", "convolution", "segmentation", "object", "detection", "camera", "scene",
     "texture", "contour", "depth", "stereo", "optical", "motion", "video", "illumination",
     "pose", "shape", "saliency", "tracking", "lens", "photograph", "frame", "visual"},
    {"graph", "vertex", "community", "link", "centrality", "clustering", "network", "social",
     "influence", "diffusion", "cascade", "triangle", "spectral", "friendship", "neighborhood",
     "modularity", "bipartite", "adjacency", "homophily", "follower", "ties", "epidemic",
     "hub", "motif"},
    {"speech", "acoustic", "phoneme", "parser", "grammar", "translation", "syntax", "lexicon",
     "dialogue", "utterance", "morphology", "tagging", "treebank", "alignment", "prosody",
     "vowel", "speaker", "transcription", "accent", "dialect", "pronunciation", "bilingual",
     "sentence", "vocabulary"},
}};

const WordList kGenericWords = {
    "method", "approach", "propose", "result", "show", "model", "paper", "study", "present",
    "evaluate", "experiment", "performance", "improve", "novel", "framework", "data", "analysis",
    "task", "system", "technique", "problem", "baseline", "measure", "significant", "large",
    "existing", "effective", "efficient", "report", "previous", "general", "observe"};

const WordList kFunctionWords = {"the", "a", "of", "we", "in", "to", "and", "this",
                                 "that", "is", "are", "with", "for", "on", "by", "our"};

const std::array<std::string_view, 4> kVenues = {"sigir", "cvpr", "kdd", "acl"};

std::string_view pick(const WordList& words, Rng& rng) { return words[rng.below(words.size())]; }

std::string join_sentence(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  if (!out.empty()) out[0] = static_cast<char>(out[0] - 'a' + 'A');
  out.push_back('.');
  return out;
}

// On-topic sentence: mostly the paper's focus words, some topic words.
std::vector<std::string> topic_sentence(const WordList& focus, const WordList& topic, Rng& rng) {
  const std::size_t length = 11 + rng.below(6);
  std::vector<std::string> tokens;
  for (std::size_t k = 0; k < length; ++k) {
    const double u = rng.uniform01();
    if (u < 0.45) tokens.emplace_back(pick(focus, rng));
    else if (u < 0.6) tokens.emplace_back(pick(topic, rng));
    else if (u < 0.75) tokens.emplace_back(pick(kGenericWords, rng));
    else tokens.emplace_back(pick(kFunctionWords, rng));
  }
  return tokens;
}

std::vector<std::string> filler_sentence(Rng& rng) {
  const std::size_t length = 10 + rng.below(6);
  std::vector<std::string> tokens;
  for (std::size_t k = 0; k < length; ++k)
    tokens.emplace_back(rng.uniform01() < 0.6 ? pick(kGenericWords, rng) : pick(kFunctionWords, rng));
  return tokens;
}

WordList choose_focus(const WordList& topic, std::size_t count, Rng& rng) {
  WordList pool = topic;
  rng.shuffle(pool);
  pool.resize(count);
  return pool;
}

std::string two_digit(std::size_t v) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02zu", v);
  return buf;
}

struct SourcePaper {
  std::size_t cluster;
  std::vector<std::vector<std::string>> topic_sentences;
};

}  // namespace

std::vector<CorpusRecord> generate_synthetic_corpus(const SyntheticCorpusOptions& options) {
  Rng rng(options.seed);
  const std::size_t clusters = std::min(options.clusters, kTopicWords.size());
  std::vector<CorpusRecord> records;
  std::vector<SourcePaper> sources;
  std::vector<std::vector<std::size_t>> cluster_sources(clusters);

  auto authors_for = [&](std::size_t c) {
    std::vector<std::string> out;
    const std::size_t first = rng.below(6);
    out.push_back("c" + std::to_string(c) + "_author" + std::to_string(first));
    out.push_back("c" + std::to_string(c) + "_author" + std::to_string((first + 1 + rng.below(5)) % 6));
    std::sort(out.begin(), out.end());
    return out;
  };
  auto keywords_for = [&](std::size_t c) {
    const WordList kw = choose_focus(kTopicWords[c], 3, rng);
    std::vector<std::string> out(kw.begin(), kw.end());
    std::sort(out.begin(), out.end());
    return out;
  };

  for (std::size_t c = 0; c < clusters; ++c) {
    for (std::size_t s = 0; s < options.sources_per_cluster; ++s) {
      CorpusRecord rec;
      const std::size_t number = c * options.sources_per_cluster + s;
      rec.paper_id = "s" + two_digit(number);
      rec.title = "Source study " + std::to_string(number);
      rec.year = 2000 + static_cast<int>(s);
      rec.authors = authors_for(c);
      rec.keywords = keywords_for(c);
      rec.venue = std::string(kVenues[c]);
      const WordList focus = choose_focus(kTopicWords[c], 8, rng);
      SourcePaper src{c, {}};
      for (std::size_t k = 0; k < options.topic_sentences; ++k)
        src.topic_sentences.push_back(topic_sentence(focus, kTopicWords[c], rng));
      // Abstract: two on-topic sentences and one filler; body: the rest, shuffled.
      std::vector<std::vector<std::string>> body;
      for (std::size_t k = 2; k < src.topic_sentences.size(); ++k) body.push_back(src.topic_sentences[k]);
      for (std::size_t k = 1; k < options.filler_sentences; ++k) body.push_back(filler_sentence(rng));
      rng.shuffle(body);
      rec.abstract_sentences = {join_sentence(src.topic_sentences[0]), join_sentence(filler_sentence(rng))};
      if (src.topic_sentences.size() > 1) rec.abstract_sentences.push_back(join_sentence(src.topic_sentences[1]));
      for (const auto& b : body) rec.body_sentences.push_back({"body", join_sentence(b)});
      // Earlier sources of the same cluster.
      for (std::size_t k = 0; k < std::min<std::size_t>(s, 2); ++k) {
        const std::size_t earlier = c * options.sources_per_cluster + rng.below(s);
        const std::string rid = "s" + two_digit(earlier);
        const bool dup = std::any_of(rec.references.begin(), rec.references.end(),
                                     [&](const Reference& r) { return r.paper_id == rid; });
        if (!dup) rec.references.push_back({rid, 1, 2, false});
      }
      cluster_sources[c].push_back(sources.size());
      sources.push_back(std::move(src));
      records.push_back(std::move(rec));
    }
  }

  for (std::size_t c = 0; c < clusters; ++c) {
    for (std::size_t t = 0; t < options.targets_per_cluster; ++t) {
      CorpusRecord rec;
      const std::size_t number = c * options.targets_per_cluster + t;
      rec.paper_id = "t" + two_digit(number);
      rec.title = "Target study " + std::to_string(number);
      rec.year = 2012 + static_cast<int>(t % 4);
      rec.authors = authors_for(c);
      rec.keywords = keywords_for(c);
      rec.venue = std::string(kVenues[c]);
      const WordList focus = choose_focus(kTopicWords[c], 8, rng);
      rec.abstract_sentences = {join_sentence(topic_sentence(focus, kTopicWords[c], rng)),
                                join_sentence(topic_sentence(focus, kTopicWords[c], rng)),
                                join_sentence(filler_sentence(rng))};
      for (std::size_t k = 0; k < 3; ++k) {
        rec.body_sentences.push_back({"introduction", join_sentence(topic_sentence(focus, kTopicWords[c], rng))});
        rec.body_sentences.push_back({"introduction", join_sentence(filler_sentence(rng))});
      }

      std::vector<std::size_t> own = cluster_sources[c];
      rng.shuffle(own);
      own.resize(std::min(own.size(), options.own_references));
      std::vector<std::size_t> foreign;
      for (std::size_t o = 0; o < clusters; ++o)
        if (o != c) foreign.insert(foreign.end(), cluster_sources[o].begin(), cluster_sources[o].end());
      rng.shuffle(foreign);
      foreign.resize(std::min(foreign.size(), options.foreign_references));

      std::vector<std::string> gold;
      gold.push_back(join_sentence(filler_sentence(rng)));
      for (std::size_t k = 0; k < own.size(); ++k) {
        const std::size_t src = own[k];
        const int rw = 1 + static_cast<int>(k % 3);
        rec.references.push_back({records[src].paper_id, rw, rw + 2, false});
        std::vector<std::size_t> picks(sources[src].topic_sentences.size());
        for (std::size_t i = 0; i < picks.size(); ++i) picks[i] = i;
        rng.shuffle(picks);
        for (std::size_t g = 0; g < std::min(options.gold_sentences_per_reference, picks.size()); ++g) {
          std::vector<std::string> tokens = sources[src].topic_sentences[picks[g]];
          for (auto& tok : tokens)
            if (rng.uniform01() < options.paraphrase_rate) tok = std::string(pick(kTopicWords[c], rng));
          gold.push_back(join_sentence(tokens));
        }
      }
      for (std::size_t k = 0; k < foreign.size(); ++k)
        rec.references.push_back({records[foreign[k]].paper_id, 0, 1 + static_cast<int>(k % 2), false});
      for (std::size_t k = 0; k < gold.size(); ++k) {
        if (k) rec.related_work_text.push_back(' ');
        rec.related_work_text += gold[k];
      }
      records.push_back(std::move(rec));
    }
  }
  std::sort(records.begin(), records.end(),
            [](const CorpusRecord& a, const CorpusRecord& b) { return a.paper_id < b.paper_id; });
  return records;
}

std::string synthetic_corpus_jsonl(const SyntheticCorpusOptions& options) {
  std::string out;
  for (const auto& rec : generate_synthetic_corpus(options)) {
    out += serialize_record(rec);
    out.push_back('\n');
  }
  return out;
}

PlantedEudInstance planted_eud_instance() {
  constexpr std::size_t kTargets = 3;
  constexpr std::size_t kRefsPerTarget = 4;
  constexpr std::size_t kDecoys = 15;
  Corpus corpus;
  std::vector<FitnessTarget> targets;
  for (std::size_t d = 0; d < kDecoys; ++d) {
    CorpusRecord rec;
    rec.paper_id = "d" + two_digit(d);
    rec.year = 2005;
    const std::size_t owner = d % kTargets;
    rec.authors = {"author" + std::to_string(owner) + "a", "author" + std::to_string(owner) + "b"};
    rec.keywords = {"kw" + std::to_string(owner)};
    rec.venue = "shared";
    // Decoys cite each other so that random walks accumulate on them.
    rec.references.push_back({"d" + two_digit((d + 1) % kDecoys), 1, 1, false});
    rec.references.push_back({"d" + two_digit((d + kTargets) % kDecoys), 1, 1, false});
    corpus.add(std::move(rec));
  }
  for (std::size_t r = 0; r < kTargets * kRefsPerTarget; ++r) {
    CorpusRecord rec;
    rec.paper_id = "r" + two_digit(r);
    rec.year = 2005;
    corpus.add(std::move(rec));
  }
  for (std::size_t t = 0; t < kTargets; ++t) {
    CorpusRecord rec;
    rec.paper_id = "t" + two_digit(t);
    rec.year = 2010;
    rec.authors = {"author" + std::to_string(t) + "a", "author" + std::to_string(t) + "b"};
    rec.keywords = {"kw" + std::to_string(t)};
    rec.venue = "shared";
    FitnessTarget ft;
    ft.target = NodeId::paper(rec.paper_id);
    for (std::size_t r = 0; r < kRefsPerTarget; ++r) {
      const std::string rid = "r" + two_digit(t * kRefsPerTarget + r);
      rec.references.push_back({rid, 1, 1, false});
      ft.references.push_back(NodeId::paper(rid));
    }
    targets.push_back(std::move(ft));
    corpus.add(std::move(rec));
  }
  corpus.resolve_references();
  PlantedEudInstance instance;
  instance.graph = std::make_shared<const HeteroGraph>(build_graph(corpus, 2010));
  for (auto& ft : targets) ft.graph = instance.graph.get();
  instance.targets = std::move(targets);
  return instance;
}

}  // namespace relsum
