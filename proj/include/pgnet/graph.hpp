#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pgnet/tensor.hpp"

namespace pgnet::ad {

using NodeId = int32_t;

// Reverse-mode tape over dense tensors. Nodes are appended in construction
// order, so insertion order is a topological order by construction: an op can
// only consume ids that already exist. backward() walks the tape from the
// loss node down to the leaves.
//
// Broadcasting is deliberately narrow: add() accepts equal shapes or a
// [1 x c] row vector against an [r x c] matrix. Everything else is a shape
// error. Reductions accumulate in double regardless of T.
template <typename T>
class Graph {
 public:
  struct Node {
    std::string op;
    std::vector<NodeId> inputs;
    Tensor<T> value;
    Tensor<T> grad;         // allocated during backward
    bool requires_grad = false;
    std::function<void()> back;  // empty for leaves
  };

  // Leaves. value() nodes never receive gradients; param() nodes do.
  NodeId value(Tensor<T> t) { return leaf(std::move(t), false, "value"); }
  NodeId param(Tensor<T> t) { return leaf(std::move(t), true, "param"); }

  NodeId matmul(NodeId a, NodeId b);
  NodeId add(NodeId a, NodeId b);   // same shape, or b = [1 x c] broadcast over rows
  NodeId sub(NodeId a, NodeId b);   // same shape
  NodeId mul(NodeId a, NodeId b);   // elementwise, same shape
  NodeId emin(NodeId a, NodeId b);  // elementwise minimum, same shape
  NodeId scale(NodeId a, double k);
  NodeId tanh_op(NodeId a);
  NodeId sigmoid(NodeId a);
  NodeId log_op(NodeId a);
  NodeId clamp(NodeId a, double lo, double hi);  // grad passes where lo < x < hi
  NodeId softmax(NodeId a);  // per row over the last axis
  // Per-row softmax restricted to positions where mask is nonzero; masked
  // positions get exactly 0. The mask is not differentiated.
  NodeId masked_softmax(NodeId a, const Tensor<T>& mask);
  NodeId transpose(NodeId a);
  NodeId concat_cols(std::span<const NodeId> xs);
  NodeId concat_rows(std::span<const NodeId> xs);
  NodeId slice_cols(NodeId a, int begin, int end);
  NodeId sum(NodeId a);   // full reduction to [1 x 1]
  NodeId mean(NodeId a);  // full reduction to [1 x 1]
  // Row gather: out[i, :] = table[ids[i], :].
  NodeId rows(NodeId table, std::vector<int> ids);
  // Scatter-add of a [1 x n] row into [1 x width]: out[0, ids[i]] += a[0, i].
  NodeId scatter_add_cols(NodeId a, std::vector<int> ids, int width);
  NodeId pad_cols(NodeId a, int width);  // append zero columns up to width
  NodeId pick(NodeId a, int r, int c);   // single element as [1 x 1]

  // Escape hatch for custom unary ops (used by tests to plant deliberately
  // wrong backward rules in front of the gradient checker).
  NodeId unary_custom(const std::string& name, NodeId a,
                      std::function<Tensor<T>(const Tensor<T>&)> fwd,
                      std::function<void(const Tensor<T>& x, const Tensor<T>& y,
                                         const Tensor<T>& gy, Tensor<T>& gx)>
                          bwd);

  // Populates grad on every requires_grad ancestor of loss. loss must be a
  // scalar ([1 x 1]) node of this graph.
  void backward(NodeId loss);

  const Tensor<T>& val(NodeId id) const { return node(id).value; }
  const Tensor<T>& grad(NodeId id) const;
  size_t size() const { return nodes_.size(); }
  const Node& node(NodeId id) const;

 private:
  Node& node_mut(NodeId id);
  NodeId leaf(Tensor<T> t, bool requires_grad, const char* op);
  NodeId push(Node n);
  void ensure_grad(NodeId id);
  void check_finite(const char* op, const Tensor<T>& t) const;

  std::vector<Node> nodes_;
};

// Max over all coordinates of |analytic - central difference| /
// max(1, |central difference|). `build` must deterministically construct a
// scalar loss from leaves created with g.param(point[k]), in order.
template <typename T>
double grad_check(
    const std::function<NodeId(Graph<T>&, const std::vector<NodeId>&)>& build,
    std::vector<Tensor<T>> point, double step);

using GraphF = Graph<float>;
using GraphD = Graph<double>;

}  // namespace pgnet::ad
