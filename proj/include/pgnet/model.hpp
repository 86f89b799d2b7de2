#pragma once

#include <map>

#include "pgnet/corpus.hpp"
#include "pgnet/graph.hpp"
#include "pgnet/params.hpp"

namespace pgnet::model {

// Graph leaves for one forward/backward pass, keyed by parameter name.
template <typename T>
struct ParamNodes {
  ModelDims dims;
  std::map<std::string, ad::NodeId> ids;
  ad::NodeId at(const std::string& name) const {
    auto it = ids.find(name);
    if (it == ids.end()) fail("model: unbound parameter '", name, "'");
    return it->second;
  }
};

// Copies every parameter into the graph. trainable=false binds constants,
// for validation and decoding.
template <typename T>
ParamNodes<T> bind_params(ad::Graph<T>& g, const ModelParams& p,
                          bool trainable = true);

// Rebuild ParamNodes from pre-made leaves in ModelParams::names order
// (the gradient checker owns leaf creation).
template <typename T>
ParamNodes<T> bind_leaves(const ModelDims& dims,
                          const std::vector<ad::NodeId>& leaves);

template <typename T>
struct EncoderOut {
  ad::NodeId h_states;  // n x 2*d_hid, one row per source position
  ad::NodeId h_proj;    // n x attn_dim, h_states * W_h precomputed
  ad::NodeId dec_h0;    // 1 x d_hid
  ad::NodeId dec_c0;    // 1 x d_hid
  std::vector<int> source_extended_ids;
  ad::Tensor<T> source_mask;  // 1 x n, all ones after trimming
  int n_src = 0;
  int n_oov = 0;
};

template <typename T>
struct DecoderState {
  ad::NodeId h;         // 1 x d_hid
  ad::NodeId c;         // 1 x d_hid
  ad::NodeId coverage;  // 1 x n_src, running sum of prior attentions
};

template <typename T>
struct StepOut {
  DecoderState<T> next;  // coverage already advanced by this step's attention
  ad::NodeId x;          // 1 x d_emb embedded input
  ad::NodeId attn;       // 1 x n_src
  ad::NodeId h_star;     // 1 x 2*d_hid context vector
  ad::NodeId p_gen;      // 1 x 1, clamped to [1e-6, 1 - 1e-6]
  ad::NodeId p_final;    // 1 x (V + n_oov)
};

// Embedding lookup; extended ids fold to UNK first.
template <typename T>
ad::NodeId embed(ad::Graph<T>& g, const ParamNodes<T>& pn, std::vector<int> ids);

// Bidirectional LSTM over the article. plain_ids are UNK-mapped vocabulary
// ids; extended_ids carry the copy-mechanism target space.
template <typename T>
EncoderOut<T> encode(ad::Graph<T>& g, const ParamNodes<T>& pn,
                     const std::vector<int>& plain_ids,
                     const std::vector<int>& extended_ids, int n_oov);

// Variant for padded rows: trims by the mask (which must be a contiguous
// prefix of ones) and errors on all-masked input.
template <typename T>
EncoderOut<T> encode_masked(ad::Graph<T>& g, const ParamNodes<T>& pn,
                            const std::vector<int>& plain_ids,
                            const std::vector<int>& extended_ids,
                            const std::vector<int>& mask, int n_oov);

template <typename T>
ad::NodeId attention(ad::Graph<T>& g, const ParamNodes<T>& pn,
                     const EncoderOut<T>& enc, ad::NodeId s, ad::NodeId coverage,
                     bool use_coverage);

template <typename T>
ad::NodeId context(ad::Graph<T>& g, ad::NodeId attn, ad::NodeId h_states);

template <typename T>
ad::NodeId vocab_dist(ad::Graph<T>& g, const ParamNodes<T>& pn, ad::NodeId s,
                      ad::NodeId h_star);

template <typename T>
ad::NodeId gen_prob(ad::Graph<T>& g, const ParamNodes<T>& pn, ad::NodeId h_star,
                    ad::NodeId s, ad::NodeId x);

// P_final(w) = p_gen * P_vocab(w) + (1 - p_gen) * sum of attention on source
// positions holding w, over the extended vocabulary V + n_oov.
template <typename T>
ad::NodeId final_dist(ad::Graph<T>& g, ad::NodeId p_gen, ad::NodeId p_vocab,
                      ad::NodeId attn, const std::vector<int>& source_extended_ids,
                      int n_oov, int vocab_size);

// -log(max(P_final[target], 1e-12)) plus the coverage penalty
// lambda * sum_i min(a_i, c_i) when coverage is enabled.
template <typename T>
ad::NodeId step_loss(ad::Graph<T>& g, ad::NodeId p_final, int target_id,
                     ad::NodeId attn, ad::NodeId coverage, double lambda,
                     bool use_coverage);

template <typename T>
DecoderState<T> initial_state(ad::Graph<T>& g, const EncoderOut<T>& enc);

template <typename T>
StepOut<T> decoder_step(ad::Graph<T>& g, const ParamNodes<T>& pn,
                        const EncoderOut<T>& enc, const DecoderState<T>& state,
                        int input_id_plain, bool use_coverage);

// Teacher-forced mean step loss per example, then mean over the batch.
template <typename T>
ad::NodeId sequence_loss(ad::Graph<T>& g, const ParamNodes<T>& pn,
                         const Batch& batch, double lambda, bool use_coverage);

}  // namespace pgnet::model
