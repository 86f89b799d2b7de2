#include "pgnet/model.hpp"

#include <algorithm>
#include <limits>

namespace pgnet::model {

using ad::Graph;
using ad::NodeId;
using ad::Tensor;

template <typename T>
ParamNodes<T> bind_params(Graph<T>& g, const ModelParams& p, bool trainable) {
  p.validate();
  ParamNodes<T> pn;
  pn.dims = p.dims;
  for (const auto& [name, tensor] : p.tensors) {
    Tensor<T> t = tensor.template cast<T>();
    pn.ids[name] = trainable ? g.param(std::move(t)) : g.value(std::move(t));
  }
  return pn;
}

template <typename T>
ParamNodes<T> bind_leaves(const ModelDims& dims,
                          const std::vector<NodeId>& leaves) {
  const auto names = ModelParams::names(dims);
  if (names.size() != leaves.size())
    fail("model: ", leaves.size(), " leaves for ", names.size(), " parameters");
  ParamNodes<T> pn;
  pn.dims = dims;
  for (size_t i = 0; i < names.size(); ++i) pn.ids[names[i]] = leaves[i];
  return pn;
}

namespace {

int unk_fold(int id, int vocab_size) {
  if (id < 0) fail("embed: negative id ", id);
  return id < vocab_size ? id : Vocabulary::kUnk;
}

// One LSTM cell step; returns (h, c).
template <typename T>
std::pair<NodeId, NodeId> lstm_cell(Graph<T>& g, NodeId W_ih, NodeId W_hh,
                                    NodeId b, NodeId x, NodeId h, NodeId c,
                                    int d_hid) {
  NodeId gates = g.add(g.add(g.matmul(x, W_ih), g.matmul(h, W_hh)), b);
  NodeId i = g.sigmoid(g.slice_cols(gates, 0, d_hid));
  NodeId f = g.sigmoid(g.slice_cols(gates, d_hid, 2 * d_hid));
  NodeId u = g.tanh_op(g.slice_cols(gates, 2 * d_hid, 3 * d_hid));
  NodeId o = g.sigmoid(g.slice_cols(gates, 3 * d_hid, 4 * d_hid));
  NodeId c_new = g.add(g.mul(f, c), g.mul(i, u));
  NodeId h_new = g.mul(o, g.tanh_op(c_new));
  return {h_new, c_new};
}

}  // namespace

template <typename T>
NodeId embed(Graph<T>& g, const ParamNodes<T>& pn, std::vector<int> ids) {
  for (int& id : ids) id = unk_fold(id, pn.dims.vocab_size);
  return g.rows(pn.at("embedding"), std::move(ids));
}

template <typename T>
EncoderOut<T> encode(Graph<T>& g, const ParamNodes<T>& pn,
                     const std::vector<int>& plain_ids,
                     const std::vector<int>& extended_ids, int n_oov) {
  const int n = static_cast<int>(plain_ids.size());
  if (n == 0) fail("encode: empty article");
  if (extended_ids.size() != plain_ids.size())
    fail("encode: ", extended_ids.size(), " extended ids for ", n, " tokens");
  const int h = pn.dims.d_hid;

  std::vector<NodeId> xs(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    xs[static_cast<size_t>(i)] = embed(g, pn, {plain_ids[static_cast<size_t>(i)]});

  const NodeId zero_h = g.value(Tensor<T>::zeros(1, h));
  NodeId fh = zero_h, fc = zero_h;
  std::vector<NodeId> fwd(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    std::tie(fh, fc) = lstm_cell(g, pn.at("enc_fwd.W_ih"), pn.at("enc_fwd.W_hh"),
                                 pn.at("enc_fwd.b"), xs[static_cast<size_t>(i)],
                                 fh, fc, h);
    fwd[static_cast<size_t>(i)] = fh;
  }

  NodeId bh = zero_h, bc = zero_h;
  std::vector<NodeId> bwd(static_cast<size_t>(n));
  for (int i = n - 1; i >= 0; --i) {
    std::tie(bh, bc) = lstm_cell(g, pn.at("enc_bwd.W_ih"), pn.at("enc_bwd.W_hh"),
                                 pn.at("enc_bwd.b"), xs[static_cast<size_t>(i)],
                                 bh, bc, h);
    bwd[static_cast<size_t>(i)] = bh;
  }

  std::vector<NodeId> rows(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const NodeId pair[] = {fwd[static_cast<size_t>(i)], bwd[static_cast<size_t>(i)]};
    rows[static_cast<size_t>(i)] = g.concat_cols(pair);
  }

  EncoderOut<T> out;
  out.h_states = g.concat_rows(rows);
  out.h_proj = g.matmul(out.h_states, pn.at("attn.W_h"));

  // Single affine+tanh reduction of the final states seeds the decoder.
  const NodeId finals[] = {fh, bh, fc, bc};
  NodeId reduced = g.tanh_op(
      g.add(g.matmul(g.concat_cols(finals), pn.at("reduce.W")), pn.at("reduce.b")));
  out.dec_h0 = g.slice_cols(reduced, 0, h);
  out.dec_c0 = g.slice_cols(reduced, h, 2 * h);

  out.source_extended_ids = extended_ids;
  out.source_mask = Tensor<T>::full(1, n, T(1));
  out.n_src = n;
  out.n_oov = n_oov;
  return out;
}

template <typename T>
EncoderOut<T> encode_masked(Graph<T>& g, const ParamNodes<T>& pn,
                            const std::vector<int>& plain_ids,
                            const std::vector<int>& extended_ids,
                            const std::vector<int>& mask, int n_oov) {
  size_t n = 0;
  while (n < mask.size() && mask[n] != 0) ++n;
  for (size_t i = n; i < mask.size(); ++i)
    if (mask[i] != 0) fail("encode: mask must be a contiguous prefix of ones");
  if (n == 0) fail("encode: all-masked input");
  std::vector<int> plain(plain_ids.begin(), plain_ids.begin() + static_cast<long>(n));
  std::vector<int> ext(extended_ids.begin(), extended_ids.begin() + static_cast<long>(n));
  return encode(g, pn, plain, ext, n_oov);
}

template <typename T>
NodeId attention(Graph<T>& g, const ParamNodes<T>& pn, const EncoderOut<T>& enc,
                 NodeId s, NodeId coverage, bool use_coverage) {
  NodeId feats = g.add(enc.h_proj, g.matmul(s, pn.at("attn.W_s")));
  if (use_coverage)
    feats = g.add(feats, g.matmul(g.transpose(coverage), pn.at("attn.w_c")));
  feats = g.add(feats, pn.at("attn.b"));
  NodeId scores = g.matmul(g.tanh_op(feats), pn.at("attn.v"));  // n x 1
  return g.masked_softmax(g.transpose(scores), enc.source_mask);
}

template <typename T>
NodeId context(Graph<T>& g, NodeId attn, NodeId h_states) {
  return g.matmul(attn, h_states);
}

template <typename T>
NodeId vocab_dist(Graph<T>& g, const ParamNodes<T>& pn, NodeId s, NodeId h_star) {
  const NodeId sh[] = {s, h_star};
  NodeId inner = g.add(g.matmul(g.concat_cols(sh), pn.at("proj.V")), pn.at("proj.b"));
  NodeId logits = g.add(g.matmul(inner, pn.at("proj.Vp")), pn.at("proj.bp"));
  return g.softmax(logits);
}

template <typename T>
NodeId gen_prob(Graph<T>& g, const ParamNodes<T>& pn, NodeId h_star, NodeId s,
                NodeId x) {
  NodeId logit = g.add(g.add(g.matmul(h_star, pn.at("gen.w_hstar")),
                             g.matmul(s, pn.at("gen.w_s"))),
                       g.add(g.matmul(x, pn.at("gen.w_x")), pn.at("gen.b")));
  return g.clamp(g.sigmoid(logit), 1e-6, 1.0 - 1e-6);
}

template <typename T>
NodeId final_dist(Graph<T>& g, NodeId p_gen, NodeId p_vocab, NodeId attn,
                  const std::vector<int>& source_extended_ids, int n_oov,
                  int vocab_size) {
  const int total = vocab_size + n_oov;
  NodeId gen_part = g.matmul(p_gen, g.pad_cols(p_vocab, total));
  NodeId one = g.value(Tensor<T>::full(1, 1, T(1)));
  NodeId copy_mass = g.scatter_add_cols(attn, source_extended_ids, total);
  NodeId copy_part = g.matmul(g.sub(one, p_gen), copy_mass);
  return g.add(gen_part, copy_part);
}

template <typename T>
NodeId step_loss(Graph<T>& g, NodeId p_final, int target_id, NodeId attn,
                 NodeId coverage, double lambda, bool use_coverage) {
  if (target_id < 0 || target_id >= g.val(p_final).cols())
    fail("step_loss: target id ", target_id, " outside distribution of size ",
         g.val(p_final).cols());
  NodeId p = g.clamp(g.pick(p_final, 0, target_id), 1e-12,
                     std::numeric_limits<double>::infinity());
  NodeId nll = g.scale(g.log_op(p), -1.0);
  if (!use_coverage) return nll;
  NodeId cov_loss = g.sum(g.emin(attn, coverage));
  return g.add(nll, g.scale(cov_loss, lambda));
}

template <typename T>
DecoderState<T> initial_state(Graph<T>& g, const EncoderOut<T>& enc) {
  return {enc.dec_h0, enc.dec_c0,
          g.value(Tensor<T>::zeros(1, enc.n_src))};
}

template <typename T>
StepOut<T> decoder_step(Graph<T>& g, const ParamNodes<T>& pn,
                        const EncoderOut<T>& enc, const DecoderState<T>& state,
                        int input_id_plain, bool use_coverage) {
  StepOut<T> out;
  out.x = embed(g, pn, {input_id_plain});
  auto [h, c] = lstm_cell(g, pn.at("dec.W_ih"), pn.at("dec.W_hh"), pn.at("dec.b"),
                          out.x, state.h, state.c, pn.dims.d_hid);
  out.attn = attention(g, pn, enc, h, state.coverage, use_coverage);
  out.h_star = context(g, out.attn, enc.h_states);
  NodeId p_vocab = vocab_dist(g, pn, h, out.h_star);
  out.p_gen = gen_prob(g, pn, out.h_star, h, out.x);
  out.p_final = final_dist(g, out.p_gen, p_vocab, out.attn,
                           enc.source_extended_ids, enc.n_oov,
                           pn.dims.vocab_size);
  out.next = {h, c, g.add(state.coverage, out.attn)};
  return out;
}

template <typename T>
NodeId sequence_loss(Graph<T>& g, const ParamNodes<T>& pn, const Batch& batch,
                     double lambda, bool use_coverage) {
  if (batch.size() == 0) fail("sequence_loss: empty batch");
  std::vector<NodeId> example_losses;
  for (int b = 0; b < batch.size(); ++b) {
    const size_t bi = static_cast<size_t>(b);
    EncoderOut<T> enc = encode_masked(
        g, pn, batch.article_ids[bi], batch.article_extended_ids[bi],
        batch.article_mask[bi], static_cast<int>(batch.oov_words[bi].size()));

    int T_b = 0;
    for (int m : batch.summary_mask[bi]) T_b += m != 0 ? 1 : 0;
    if (T_b == 0) fail("sequence_loss: example ", b, " has empty target");

    DecoderState<T> state = initial_state(g, enc);
    NodeId total = {};
    bool first = true;
    for (int t = 0; t < T_b; ++t) {
      const int input_id = batch.summary_input_ids[bi][static_cast<size_t>(t)];
      const int target_id =
          batch.summary_target_extended_ids[bi][static_cast<size_t>(t)];
      StepOut<T> step = decoder_step(g, pn, enc, state,
                                     unk_fold(input_id, pn.dims.vocab_size),
                                     use_coverage);
      NodeId lt = step_loss(g, step.p_final, target_id, step.attn,
                            state.coverage, lambda, use_coverage);
      total = first ? lt : g.add(total, lt);
      first = false;
      state = step.next;
    }
    example_losses.push_back(g.scale(total, 1.0 / T_b));
  }
  return g.mean(g.concat_cols(example_losses));
}

#define PGNET_INSTANTIATE(T)                                                   \
  template ParamNodes<T> bind_params<T>(Graph<T>&, const ModelParams&, bool); \
  template ParamNodes<T> bind_leaves<T>(const ModelDims&,                     \
                                        const std::vector<NodeId>&);          \
  template NodeId embed<T>(Graph<T>&, const ParamNodes<T>&, std::vector<int>); \
  template EncoderOut<T> encode<T>(Graph<T>&, const ParamNodes<T>&,           \
                                   const std::vector<int>&,                   \
                                   const std::vector<int>&, int);             \
  template EncoderOut<T> encode_masked<T>(                                    \
      Graph<T>&, const ParamNodes<T>&, const std::vector<int>&,               \
      const std::vector<int>&, const std::vector<int>&, int);                 \
  template NodeId attention<T>(Graph<T>&, const ParamNodes<T>&,               \
                               const EncoderOut<T>&, NodeId, NodeId, bool);   \
  template NodeId context<T>(Graph<T>&, NodeId, NodeId);                      \
  template NodeId vocab_dist<T>(Graph<T>&, const ParamNodes<T>&, NodeId,      \
                                NodeId);                                      \
  template NodeId gen_prob<T>(Graph<T>&, const ParamNodes<T>&, NodeId,        \
                              NodeId, NodeId);                                \
  template NodeId final_dist<T>(Graph<T>&, NodeId, NodeId, NodeId,            \
                                const std::vector<int>&, int, int);           \
  template NodeId step_loss<T>(Graph<T>&, NodeId, int, NodeId, NodeId,        \
                               double, bool);                                 \
  template DecoderState<T> initial_state<T>(Graph<T>&, const EncoderOut<T>&); \
  template StepOut<T> decoder_step<T>(Graph<T>&, const ParamNodes<T>&,        \
                                      const EncoderOut<T>&,                   \
                                      const DecoderState<T>&, int, bool);     \
  template NodeId sequence_loss<T>(Graph<T>&, const ParamNodes<T>&,           \
                                   const Batch&, double, bool);

PGNET_INSTANTIATE(float)
PGNET_INSTANTIATE(double)
#undef PGNET_INSTANTIATE

}  // namespace pgnet::model
