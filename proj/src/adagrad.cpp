#include "pgnet/adagrad.hpp"

#include <cmath>

namespace pgnet::ad {

void AdagradState::reset(const std::vector<const TensorF*>& params) {
  acc.clear();
  acc.reserve(params.size());
  for (const TensorF* p : params) {
    TensorF a(p->shape);
    for (auto& x : a.v) x = initial_accumulator;
    acc.push_back(std::move(a));
  }
}

void adagrad_step(const std::vector<TensorF*>& params,
                  const std::vector<const TensorF*>& grads, AdagradState& state) {
  if (params.size() != grads.size() || params.size() != state.acc.size())
    fail("adagrad_step: ", params.size(), " params, ", grads.size(), " grads, ",
         state.acc.size(), " accumulators");
  for (size_t k = 0; k < params.size(); ++k) {
    TensorF& p = *params[k];
    const TensorF& g = *grads[k];
    TensorF& a = state.acc[k];
    if (p.shape != g.shape || p.shape != a.shape)
      fail("adagrad_step: shape mismatch at parameter ", k, ": ", p.shape_str(),
           " vs ", g.shape_str());
    for (size_t i = 0; i < p.v.size(); ++i) {
      a.v[i] += g.v[i] * g.v[i];
      p.v[i] -= state.learning_rate * g.v[i] /
                (std::sqrt(a.v[i]) + state.epsilon);
    }
  }
}

double global_norm(const std::vector<const TensorF*>& grads) {
  double acc = 0.0;
  for (const TensorF* g : grads)
    for (float x : g->v) acc += static_cast<double>(x) * static_cast<double>(x);
  return std::sqrt(acc);
}

void clip_by_global_norm(const std::vector<TensorF*>& grads, double clip) {
  std::vector<const TensorF*> view(grads.begin(), grads.end());
  const double norm = global_norm(view);
  if (norm <= clip || norm == 0.0) return;
  const float s = static_cast<float>(clip / norm);
  for (TensorF* g : grads)
    for (float& x : g->v) x *= s;
}

}  // namespace pgnet::ad
