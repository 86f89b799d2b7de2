#include "pgnet/decoding.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "pgnet/model.hpp"

namespace pgnet {

namespace {

class ModelSession final : public DecoderSession {
 public:
  ModelSession(const ModelParams& params, const EncodedExample& ex,
               bool use_coverage)
      : use_coverage_(use_coverage), source_extended_(ex.article_extended_ids) {
    pn_ = model::bind_params(graph_, params, /*trainable=*/false);
    enc_ = model::encode(graph_, pn_, ex.article_ids, ex.article_extended_ids,
                         static_cast<int>(ex.oov_words.size()));
    extended_size_ = params.dims.vocab_size + enc_.n_oov;
  }

  int initial_state() override {
    states_.push_back(model::initial_state(graph_, enc_));
    return static_cast<int>(states_.size() - 1);
  }

  StepResult step(int state, int input_id_plain, int* next_state) override {
    const auto& st = states_.at(static_cast<size_t>(state));
    auto out = model::decoder_step(graph_, pn_, enc_, st, input_id_plain,
                                   use_coverage_);
    states_.push_back(out.next);
    if (next_state) *next_state = static_cast<int>(states_.size() - 1);

    StepResult r;
    const auto& pf = graph_.val(out.p_final);
    r.p_final.assign(pf.v.begin(), pf.v.end());
    const auto& at = graph_.val(out.attn);
    r.attn.assign(at.v.begin(), at.v.end());
    r.p_gen = static_cast<double>(graph_.val(out.p_gen).v[0]);
    return r;
  }

  int extended_size() const override { return extended_size_; }
  const std::vector<int>& source_extended_ids() const override {
    return source_extended_;
  }

 private:
  ad::GraphF graph_;
  model::ParamNodes<float> pn_;
  model::EncoderOut<float> enc_;
  std::vector<model::DecoderState<float>> states_;
  bool use_coverage_;
  int extended_size_ = 0;
  std::vector<int> source_extended_;
};

struct Hypothesis {
  std::vector<int> ids;  // emitted tokens, extended space
  double logprob_sum = 0;
  int scored_tokens = 0;  // includes STOP when finished
  int state = -1;
  bool finished = false;
  std::vector<std::vector<double>> attention;
  std::vector<std::string> origin;

  double mean_logprob() const {
    return scored_tokens == 0 ? 0 : logprob_sum / scored_tokens;
  }
};

// "copied" when the attention-sourced share of the final probability mass at
// the chosen id is the majority.
std::string origin_of(int id, const StepResult& r,
                      const std::vector<int>& src_extended) {
  double copy_mass = 0;
  for (size_t i = 0; i < src_extended.size(); ++i)
    if (src_extended[i] == id) copy_mass += r.attn[i];
  const double copy_share = (1.0 - r.p_gen) * copy_mass;
  return copy_share > r.p_final[static_cast<size_t>(id)] - copy_share ? "copied"
                                                                      : "generated";
}

int fold_for_input(int id, int vocab_size) {
  return id < vocab_size ? id : Vocabulary::kUnk;
}

DecodedSummary finish(const Hypothesis& hyp, const Vocabulary& vocab,
                      const std::vector<std::string>& oov_words) {
  DecodedSummary out;
  out.ids = hyp.ids;
  out.tokens = decode_extended(hyp.ids, vocab, oov_words);
  out.origin = hyp.origin;
  out.attention = hyp.attention;
  out.mean_logprob = hyp.mean_logprob();
  return out;
}

}  // namespace

std::unique_ptr<DecoderSession> make_model_session(const ModelParams& params,
                                                   const EncodedExample& example,
                                                   bool use_coverage) {
  return std::make_unique<ModelSession>(params, example, use_coverage);
}

DecodedSummary beam_decode_session(DecoderSession& session, const Vocabulary& vocab,
                                   const std::vector<std::string>& oov_words,
                                   const DecodeOptions& opts) {
  if (opts.beam_size < 1) fail("decode: beam_size must be >= 1");
  if (opts.min_len < 1 || opts.max_len < opts.min_len)
    fail("decode: need max_len >= min_len >= 1, got ", opts.max_len, "/",
         opts.min_len);
  const bool block_unk = opts.beam_size >= 2;
  const int vocab_size = vocab.size();

  std::vector<Hypothesis> live(1);
  live[0].state = session.initial_state();
  std::vector<Hypothesis> finished;

  for (int t = 0;
       t < opts.max_len && !live.empty() &&
       static_cast<int>(finished.size()) < opts.beam_size;
       ++t) {
    struct Candidate {
      double logprob_sum;
      int token;
      size_t parent;
      double token_lp;
      StepResult* result;
      int next_state;
    };
    std::vector<Candidate> pool;
    std::vector<StepResult> results(live.size());

    for (size_t h = 0; h < live.size(); ++h) {
      Hypothesis& hyp = live[h];
      const int input = hyp.ids.empty()
                            ? Vocabulary::kStart
                            : fold_for_input(hyp.ids.back(), vocab_size);
      int next_state = -1;
      results[h] = session.step(hyp.state, input, &next_state);
      const auto& p = results[h].p_final;

      const bool allow_stop = static_cast<int>(hyp.ids.size()) >= opts.min_len;
      for (int w = 0; w < static_cast<int>(p.size()); ++w) {
        if (w == Vocabulary::kStop && !allow_stop) continue;
        if (w == Vocabulary::kStart || w == Vocabulary::kPad) continue;
        if (block_unk && w == Vocabulary::kUnk) continue;
        const double lp = std::log(std::max(p[static_cast<size_t>(w)], 1e-12));
        pool.push_back({hyp.logprob_sum + lp, w, h, lp, &results[h], next_state});
      }
    }

    // Highest total first; equal totals fall to the lower token id, then to
    // the earlier parent, so beam_size 1 reproduces greedy's argmax scan.
    std::stable_sort(pool.begin(), pool.end(), [](const Candidate& a,
                                                  const Candidate& b) {
      if (a.logprob_sum != b.logprob_sum) return a.logprob_sum > b.logprob_sum;
      if (a.parent != b.parent) return a.parent < b.parent;
      return a.token < b.token;
    });

    std::vector<Hypothesis> next_live;
    int taken = 0;
    for (const Candidate& c : pool) {
      if (static_cast<int>(next_live.size()) >= opts.beam_size ||
          taken >= 2 * opts.beam_size)
        break;
      ++taken;
      Hypothesis hyp = live[c.parent];
      hyp.logprob_sum = c.logprob_sum;
      hyp.scored_tokens += 1;
      hyp.state = c.next_state;
      if (c.token == Vocabulary::kStop) {
        hyp.finished = true;
        finished.push_back(std::move(hyp));  // retires from the beam
        continue;
      }
      hyp.ids.push_back(c.token);
      hyp.attention.push_back(c.result->attn);
      hyp.origin.push_back(origin_of(c.token, *c.result,
                                     session.source_extended_ids()));
      next_live.push_back(std::move(hyp));
    }
    live = std::move(next_live);
  }

  const Hypothesis* best = nullptr;
  for (const auto& h : finished)
    if (!best || h.mean_logprob() > best->mean_logprob()) best = &h;
  if (!best)
    for (const auto& h : live)
      if (!best || h.mean_logprob() > best->mean_logprob()) best = &h;
  if (!best) fail("decode: no hypothesis produced");
  return finish(*best, vocab, oov_words);
}

DecodedSummary greedy_decode_session(DecoderSession& session,
                                     const Vocabulary& vocab,
                                     const std::vector<std::string>& oov_words,
                                     int max_len, int min_len) {
  DecodeOptions opts;
  opts.beam_size = 1;
  opts.max_len = max_len;
  opts.min_len = min_len;
  return beam_decode_session(session, vocab, oov_words, opts);
}

DecodedSummary greedy_decode(const ModelParams& params, const EncodedExample& ex,
                             const Vocabulary& vocab, int max_len, int min_len,
                             bool use_coverage) {
  auto session = make_model_session(params, ex, use_coverage);
  return greedy_decode_session(*session, vocab, ex.oov_words, max_len, min_len);
}

DecodedSummary beam_decode(const ModelParams& params, const EncodedExample& ex,
                           const Vocabulary& vocab, const DecodeOptions& opts,
                           bool use_coverage) {
  auto session = make_model_session(params, ex, use_coverage);
  return beam_decode_session(*session, vocab, ex.oov_words, opts);
}

std::string render(const std::vector<int>& ids, const Vocabulary& vocab,
                   const std::vector<std::string>& oov_words) {
  std::vector<int> kept;
  for (int id : ids)
    if (id != Vocabulary::kStart && id != Vocabulary::kStop) kept.push_back(id);
  return join(decode_extended(kept, vocab, oov_words), " ");
}

RepetitionStats repetition_stats(const std::vector<std::string>& tokens) {
  RepetitionStats stats;
  for (int n = 1; n <= 3; ++n) {
    std::map<std::string, int> counts;
    for (size_t i = 0; i + static_cast<size_t>(n) <= tokens.size(); ++i) {
      std::string gram = tokens[i];
      for (int k = 1; k < n; ++k) gram += " " + tokens[i + static_cast<size_t>(k)];
      ++counts[gram];
    }
    for (const auto& [gram, count] : counts)
      if (count > 1) {
        ++stats.repeated_counts[static_cast<size_t>(n - 1)];
        stats.repeated_grams[static_cast<size_t>(n - 1)].push_back(gram);
      }
  }
  return stats;
}

}  // namespace pgnet
