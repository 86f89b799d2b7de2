#pragma once

#include <vector>

#include "pgnet/tensor.hpp"

namespace pgnet::ad {

// Per-coordinate Adagrad: acc += g^2; theta -= lr * g / (sqrt(acc) + eps).
// Accumulators are monotonically nondecreasing across steps.
struct AdagradState {
  std::vector<TensorF> acc;
  float learning_rate = 0.15f;
  float epsilon = 1e-10f;
  float initial_accumulator = 0.1f;

  // (Re)initializes one accumulator per parameter, filled with
  // initial_accumulator.
  void reset(const std::vector<const TensorF*>& params);
};

void adagrad_step(const std::vector<TensorF*>& params,
                  const std::vector<const TensorF*>& grads, AdagradState& state);

double global_norm(const std::vector<const TensorF*>& grads);

// Scales all gradients by clip / norm when the global norm exceeds clip.
void clip_by_global_norm(const std::vector<TensorF*>& grads, double clip);

}  // namespace pgnet::ad
