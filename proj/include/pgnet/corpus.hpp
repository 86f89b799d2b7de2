#pragma once

#include <array>
#include <string>
#include <vector>

#include "pgnet/vocab.hpp"

namespace pgnet {

struct RawExample {
  std::string article;
  std::string summary;
};

// One example in id space, with the copy mechanism's extended vocabulary:
// the k-th distinct article OOV gets id V + k.
struct EncodedExample {
  std::vector<int> article_ids;                  // UNK for OOV
  std::vector<int> article_extended_ids;         // OOVs remapped to V + k
  std::vector<std::string> oov_words;            // distinct, first-occurrence order
  std::vector<int> summary_input_ids;            // START-prefixed, plain id space
  std::vector<int> summary_target_extended_ids;  // STOP-suffixed, extended space
};

struct SplitManifest {
  uint64_t seed = 0;
  std::array<double, 3> ratios{0.70, 0.15, 0.15};
  std::vector<int> train;
  std::vector<int> validation;
  std::vector<int> test;

  std::string to_json() const;
  static SplitManifest from_json(const std::string& text);
  void save(const std::string& path) const;
  static SplitManifest load(const std::string& path);
};

// Examples padded to the batch max lengths; masks are 1 on real tokens.
struct Batch {
  std::vector<std::vector<int>> article_ids;
  std::vector<std::vector<int>> article_extended_ids;
  std::vector<std::vector<int>> article_mask;
  std::vector<std::vector<int>> summary_input_ids;
  std::vector<std::vector<int>> summary_target_extended_ids;
  std::vector<std::vector<int>> summary_mask;
  std::vector<std::vector<std::string>> oov_words;
  int size() const { return static_cast<int>(article_ids.size()); }
};

// Lowercases, splits the punctuation set {. , ? ! ' " ( ) :} into standalone
// tokens, then splits on whitespace.
std::vector<std::string> tokenize(const std::string& text);

EncodedExample encode_example(const std::vector<std::string>& article_tokens,
                              const std::vector<std::string>& summary_tokens,
                              const Vocabulary& vocab, int max_article_len,
                              int max_summary_len);

// Maps extended ids back to tokens through the vocabulary and oov_words.
std::vector<std::string> decode_extended(const std::vector<int>& ids,
                                         const Vocabulary& vocab,
                                         const std::vector<std::string>& oov_words);

enum class CorpusFormat { kCsv, kJsonl };
CorpusFormat parse_format(const std::string& name);

std::vector<RawExample> ingest(const std::string& path, CorpusFormat format,
                               const std::string& article_field,
                               const std::string& summary_field);

// RFC-style CSV: quoted fields may contain commas, newlines, and doubled
// quotes. Returns one row per record, header included.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

SplitManifest split_dataset(int n_examples, const std::array<double, 3>& ratios,
                            uint64_t seed);

std::vector<Batch> make_batches(const std::vector<EncodedExample>& examples,
                                int batch_size);

// Canonical interchange corpus: one {"article": ..., "summary": ...} per line.
std::string corpus_to_jsonl(const std::vector<RawExample>& examples);
std::vector<RawExample> corpus_from_jsonl(const std::string& text);
void save_corpus(const std::string& path, const std::vector<RawExample>& examples);
std::vector<RawExample> load_corpus(const std::string& path);

}  // namespace pgnet
