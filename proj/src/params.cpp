#include "pgnet/params.hpp"

namespace pgnet {

std::vector<std::pair<std::string, std::vector<int>>> ModelParams::shapes(
    const ModelDims& d) {
  const int e = d.d_emb, h = d.d_hid, a = d.attn_dim(), V = d.vocab_size;
  return {
      {"attn.W_h", {2 * h, a}},
      {"attn.W_s", {h, a}},
      {"attn.b", {1, a}},
      {"attn.v", {a, 1}},
      {"attn.w_c", {1, a}},
      {"dec.W_hh", {h, 4 * h}},
      {"dec.W_ih", {e, 4 * h}},
      {"dec.b", {1, 4 * h}},
      {"embedding", {V, e}},
      {"enc_bwd.W_hh", {h, 4 * h}},
      {"enc_bwd.W_ih", {e, 4 * h}},
      {"enc_bwd.b", {1, 4 * h}},
      {"enc_fwd.W_hh", {h, 4 * h}},
      {"enc_fwd.W_ih", {e, 4 * h}},
      {"enc_fwd.b", {1, 4 * h}},
      {"gen.b", {1, 1}},
      {"gen.w_hstar", {2 * h, 1}},
      {"gen.w_s", {h, 1}},
      {"gen.w_x", {e, 1}},
      {"proj.V", {3 * h, h}},
      {"proj.Vp", {h, V}},
      {"proj.b", {1, h}},
      {"proj.bp", {1, V}},
      {"reduce.W", {4 * h, 2 * h}},
      {"reduce.b", {1, 2 * h}},
  };
}

std::vector<std::string> ModelParams::names(const ModelDims& dims) {
  std::vector<std::string> out;
  for (const auto& [name, shape] : shapes(dims)) out.push_back(name);
  return out;
}

namespace {
bool zero_initialized(const std::string& name) {
  // Biases and the coverage weight; everything else is a weight matrix.
  return name.ends_with(".b") || name.ends_with(".bp") || name == "attn.w_c";
}
}  // namespace

ModelParams ModelParams::init(const ModelDims& dims, uint64_t seed) {
  if (dims.d_emb <= 0 || dims.d_hid <= 0 || dims.vocab_size <= 4)
    fail("model: invalid dims d_emb=", dims.d_emb, " d_hid=", dims.d_hid,
         " vocab=", dims.vocab_size);
  ModelParams p;
  p.dims = dims;
  Rng rng(seed);
  for (const auto& [name, shape] : shapes(dims)) {
    ad::TensorF t(shape);
    if (!zero_initialized(name))
      for (auto& x : t.v) x = static_cast<float>(rng.uniform(-0.02, 0.02));
    p.tensors.emplace(name, std::move(t));
  }
  return p;
}

const ad::TensorF& ModelParams::at(const std::string& name) const {
  auto it = tensors.find(name);
  if (it == tensors.end()) fail("model: unknown parameter '", name, "'");
  return it->second;
}

ad::TensorF& ModelParams::at(const std::string& name) {
  auto it = tensors.find(name);
  if (it == tensors.end()) fail("model: unknown parameter '", name, "'");
  return it->second;
}

void ModelParams::validate() const {
  const auto expected = shapes(dims);
  if (tensors.size() != expected.size())
    fail("model: ", tensors.size(), " parameters, expected ", expected.size());
  for (const auto& [name, shape] : expected) {
    const auto& t = at(name);
    if (t.shape != shape)
      fail("model: parameter '", name, "' has shape ", t.shape_str());
    if (!t.finite()) fail("model: parameter '", name, "' has non-finite values");
  }
}

}  // namespace pgnet
