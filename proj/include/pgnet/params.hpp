#pragma once

#include <map>
#include <string>
#include <vector>

#include "pgnet/tensor.hpp"

namespace pgnet {

struct ModelDims {
  int d_emb = 128;
  int d_hid = 256;
  int vocab_size = 50000;
  // Attention feature width; h_i is 2*d_hid wide so the W_h projection is
  // square in that space.
  int attn_dim() const { return 2 * d_hid; }
};

// Every learned tensor, keyed by name. Weights multiply row vectors from the
// left (y = x W), so each shape is {in, out}. Gate order in LSTM weights is
// input, forget, cell, output.
struct ModelParams {
  ModelDims dims;
  std::map<std::string, ad::TensorF> tensors;

  // Matrices start uniform(-0.02, 0.02); biases and the coverage weight start
  // at zero so enabling coverage is loss-neutral.
  static ModelParams init(const ModelDims& dims, uint64_t seed);

  static std::vector<std::pair<std::string, std::vector<int>>> shapes(
      const ModelDims& dims);
  static std::vector<std::string> names(const ModelDims& dims);

  const ad::TensorF& at(const std::string& name) const;
  ad::TensorF& at(const std::string& name);

  // Shape/finiteness check against dims; used after load.
  void validate() const;
};

}  // namespace pgnet
