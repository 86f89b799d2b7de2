#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "pgnet/corpus.hpp"
#include "pgnet/params.hpp"

namespace pgnet {

// One decode step in probability space. Decoders drive a session rather than
// the model directly, so tests can rig the pointer path.
struct StepResult {
  std::vector<double> p_final;  // over V + n_oov
  std::vector<double> attn;     // over source positions
  double p_gen = 0;
};

class DecoderSession {
 public:
  virtual ~DecoderSession() = default;
  virtual int initial_state() = 0;
  // Advances from `state` on `input_id_plain`; returns the step distribution
  // and writes the successor state handle.
  virtual StepResult step(int state, int input_id_plain, int* next_state) = 0;
  virtual int extended_size() const = 0;
  virtual const std::vector<int>& source_extended_ids() const = 0;
};

// Real model session over one encoded article; parameters are shared and
// never mutated.
std::unique_ptr<DecoderSession> make_model_session(const ModelParams& params,
                                                   const EncodedExample& example,
                                                   bool use_coverage);

struct DecodedSummary {
  std::vector<int> ids;              // extended space, START/STOP excluded
  std::vector<std::string> tokens;   // OOV ids resolved through oov_words
  std::vector<std::string> origin;   // "generated" or "copied" per token
  std::vector<std::vector<double>> attention;  // one row per emitted token
  double mean_logprob = 0;
};

struct DecodeOptions {
  int beam_size = 4;
  int max_len = 120;
  int min_len = 35;
};

// Argmax of P_final per step, ties to the lowest id; STOP is suppressed until
// min_len tokens have been emitted.
DecodedSummary greedy_decode(const ModelParams& params, const EncodedExample& ex,
                             const Vocabulary& vocab, int max_len, int min_len,
                             bool use_coverage = true);

// Beam search ranked by mean log-probability per scored token. With
// beam_size == 1 this reduces token-for-token to greedy_decode; hypotheses
// proposing UNK are pruned when beam_size >= 2.
DecodedSummary beam_decode(const ModelParams& params, const EncodedExample& ex,
                           const Vocabulary& vocab, const DecodeOptions& opts,
                           bool use_coverage = true);

// Session-level entry points used by both of the above and by tests.
DecodedSummary greedy_decode_session(DecoderSession& session,
                                     const Vocabulary& vocab,
                                     const std::vector<std::string>& oov_words,
                                     int max_len, int min_len);
DecodedSummary beam_decode_session(DecoderSession& session, const Vocabulary& vocab,
                                   const std::vector<std::string>& oov_words,
                                   const DecodeOptions& opts);

// Vocabulary + oov_words rendering with START/STOP stripped; errors on ids
// outside the extended range.
std::string render(const std::vector<int>& ids, const Vocabulary& vocab,
                   const std::vector<std::string>& oov_words);

struct RepetitionStats {
  // Index k holds (k+1)-gram figures: number of distinct n-grams occurring
  // more than once, and those n-grams space-joined.
  std::array<int, 3> repeated_counts{0, 0, 0};
  std::array<std::vector<std::string>, 3> repeated_grams;
};

RepetitionStats repetition_stats(const std::vector<std::string>& tokens);

}  // namespace pgnet
