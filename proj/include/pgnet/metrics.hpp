#pragma once

#include <string>
#include <unordered_set>
#include <vector>

#include "pgnet/util.hpp"

namespace pgnet {

struct Rouge2Score {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

// Clipped bigram-multiset overlap.
Rouge2Score rouge2_f1(const std::vector<std::string>& candidate,
                      const std::vector<std::string>& reference);

struct FactTriple {
  std::vector<std::string> arg1;
  std::vector<std::string> predicate;  // nonempty
  std::vector<std::string> arg2;
  int sentence_index = 0;
};

class PredicateLexicon {
 public:
  static PredicateLexicon builtin();  // compiled in from data/predicate_verbs.txt
  static PredicateLexicon from_file(const std::string& path);
  static PredicateLexicon from_tokens(const std::vector<std::string>& tokens);
  bool contains(const std::string& token) const { return set_.count(token) > 0; }
  size_t size() const { return set_.size(); }

 private:
  std::unordered_set<std::string> set_;
};

// Builtin extraction: per sentence (split on . ! ?), the first run of lexicon
// hits is the predicate, preceding tokens arg1, the rest arg2. Sentences
// without a hit yield nothing.
std::vector<FactTriple> extract_facts(const std::string& text,
                                      const PredicateLexicon& lexicon);

// Adapter contract: plain text on stdin, one triple per TSV line on stdout
// (three tab-separated fields, token lists space-joined).
std::vector<FactTriple> extract_facts_external(const std::string& text,
                                               const std::string& command);

struct FactEmbedding {
  std::vector<double> v;
};

// Deterministic hashed bag embedding over all triple tokens, L2-normalized;
// an empty hash collapses to the first basis vector.
FactEmbedding embed_fact_hashed(const FactTriple& triple, int width = 128);

// Adapter contract: one TSV triple per input line, one line of
// space-separated floats of the given width per output line.
std::vector<FactEmbedding> embed_facts_external(const std::vector<FactTriple>& triples,
                                                const std::string& command,
                                                int width);

struct FactualScore {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  bool degenerate = false;  // an empty fact set scored as zero
};

// Best-match cosine scores between generated and reference fact embeddings;
// negative cosines floor at zero.
FactualScore factual_score(const std::vector<FactEmbedding>& generated,
                           const std::vector<FactEmbedding>& reference);

struct Aggregate {
  double min = 0;
  double median = 0;
  double mean = 0;
  double max = 0;
};

Aggregate aggregate(const std::vector<double>& values);

// Backend selection as it appears on the command line:
// builtin | hashed | exec:COMMAND.
struct MetricBackends {
  std::string extractor = "builtin";
  std::string embedder = "hashed";
  std::string lexicon_path;  // empty = compiled-in default
  int embed_width = 128;
};

struct ExampleScores {
  std::string id;
  Rouge2Score rouge;
  FactualScore fact;
};

ExampleScores score_example(const std::string& id, const std::string& candidate,
                            const std::string& reference,
                            const MetricBackends& backends);

std::string scores_to_csv(const std::vector<ExampleScores>& scores);
std::vector<ExampleScores> scores_from_csv(const std::string& text);
// Table-style aggregate block: min/median/mean/max rows per metric.
std::string aggregate_to_json(const std::vector<ExampleScores>& scores);

}  // namespace pgnet
