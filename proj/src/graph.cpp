#include "pgnet/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pgnet::ad {

namespace {

template <typename T>
void shape_error(const char* op, const Tensor<T>& a, const Tensor<T>& b) {
  fail(op, ": shape mismatch ", a.shape_str(), " vs ", b.shape_str());
}

}  // namespace

template <typename T>
typename Graph<T>::Node& Graph<T>::node_mut(NodeId id) {
  if (id < 0 || static_cast<size_t>(id) >= nodes_.size())
    fail("graph: node id ", id, " not in graph of size ", nodes_.size());
  return nodes_[static_cast<size_t>(id)];
}

template <typename T>
const typename Graph<T>::Node& Graph<T>::node(NodeId id) const {
  if (id < 0 || static_cast<size_t>(id) >= nodes_.size())
    fail("graph: node id ", id, " not in graph of size ", nodes_.size());
  return nodes_[static_cast<size_t>(id)];
}

template <typename T>
void Graph<T>::check_finite(const char* op, const Tensor<T>& t) const {
  if (!t.finite()) fail(op, ": non-finite output for shape ", t.shape_str());
}

template <typename T>
NodeId Graph<T>::leaf(Tensor<T> t, bool requires_grad, const char* op) {
  check_finite(op, t);
  Node n;
  n.op = op;
  n.value = std::move(t);
  n.requires_grad = requires_grad;
  return push(std::move(n));
}

template <typename T>
NodeId Graph<T>::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

template <typename T>
void Graph<T>::ensure_grad(NodeId id) {
  Node& n = node_mut(id);
  if (n.grad.v.empty()) n.grad = Tensor<T>(n.value.shape);
}

template <typename T>
const Tensor<T>& Graph<T>::grad(NodeId id) const {
  const Node& n = node(id);
  if (n.grad.v.empty())
    fail("graph: no gradient on node ", id, " (op ", n.op,
         "); run backward first");
  return n.grad;
}

template <typename T>
NodeId Graph<T>::matmul(NodeId a, NodeId b) {
  const Tensor<T>& A = node(a).value;
  const Tensor<T>& B = node(b).value;
  if (A.shape.size() != 2 || B.shape.size() != 2 || A.cols() != B.rows())
    shape_error("matmul", A, B);
  const int r = A.rows(), k = A.cols(), c = B.cols();
  Tensor<T> out({r, c});
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) {
      double acc = 0.0;
      for (int t = 0; t < k; ++t)
        acc += static_cast<double>(A.at(i, t)) * static_cast<double>(B.at(t, j));
      out.at(i, j) = static_cast<T>(acc);
    }
  check_finite("matmul", out);

  Node n;
  n.op = "matmul";
  n.inputs = {a, b};
  n.value = std::move(out);
  n.requires_grad = node(a).requires_grad || node(b).requires_grad;
  NodeId id = static_cast<NodeId>(nodes_.size());
  n.back = [this, a, b, id] {
    const Tensor<T>& g = nodes_[id].grad;
    const Tensor<T>& A = nodes_[a].value;
    const Tensor<T>& B = nodes_[b].value;
    const int r = A.rows(), k = A.cols(), c = B.cols();
    if (nodes_[a].requires_grad) {
      Tensor<T>& gA = nodes_[a].grad;
      for (int i = 0; i < r; ++i)
        for (int t = 0; t < k; ++t) {
          double acc = 0.0;
          for (int j = 0; j < c; ++j)
            acc += static_cast<double>(g.at(i, j)) * static_cast<double>(B.at(t, j));
          gA.at(i, t) += static_cast<T>(acc);
        }
    }
    if (nodes_[b].requires_grad) {
      Tensor<T>& gB = nodes_[b].grad;
      for (int t = 0; t < k; ++t)
        for (int j = 0; j < c; ++j) {
          double acc = 0.0;
          for (int i = 0; i < r; ++i)
            acc += static_cast<double>(A.at(i, t)) * static_cast<double>(g.at(i, j));
          gB.at(t, j) += static_cast<T>(acc);
        }
    }
  };
  return push(std::move(n));
}

template <typename T>
NodeId Graph<T>::add(NodeId a, NodeId b) {
  const Tensor<T>& A = node(a).value;
  const Tensor<T>& B = node(b).value;
  const bool same = A.shape == B.shape;
  const bool bcast = B.rows() == 1 && B.cols() == A.cols() && A.shape.size() == 2 &&
                     B.shape.size() == 2;
  if (!same && !bcast) shape_error("add", A, B);

  Tensor<T> out(A.shape);
  const int r = A.rows(), c = A.cols();
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j)
      out.at(i, j) = A.at(i, j) + B.at(same ? i : 0, j);
  check_finite("add", out);

  Node n;
  n.op = "add";
  n.inputs = {a, b};
  n.value = std::move(out);
  n.requires_grad = node(a).requires_grad || node(b).requires_grad;
  NodeId id = static_cast<NodeId>(nodes_.size());
  n.back = [this, a, b, id, same] {
    const Tensor<T>& g = nodes_[id].grad;
    const int r = g.rows(), c = g.cols();
    if (nodes_[a].requires_grad) {
      Tensor<T>& gA = nodes_[a].grad;
      for (size_t i = 0; i < g.v.size(); ++i) gA.v[i] += g.v[i];
    }
    if (nodes_[b].requires_grad) {
      Tensor<T>& gB = nodes_[b].grad;
      if (same) {
        for (size_t i = 0; i < g.v.size(); ++i) gB.v[i] += g.v[i];
      } else {
        for (int j = 0; j < c; ++j) {
          double acc = 0.0;
          for (int i = 0; i < r; ++i) acc += static_cast<double>(g.at(i, j));
          gB.at(0, j) += static_cast<T>(acc);
        }
      }
    }
  };
  return push(std::move(n));
}

template <typename T>
NodeId Graph<T>::sub(NodeId a, NodeId b) {
  const Tensor<T>& A = node(a).value;
  const Tensor<T>& B = node(b).value;
  if (A.shape != B.shape) shape_error("sub", A, B);
  Tensor<T> out(A.shape);
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] = A.v[i] - B.v[i];
  check_finite("sub", out);

  Node n;
  n.op = "sub";
  n.inputs = {a, b};
  n.value = std::move(out);
  n.requires_grad = node(a).requires_grad || node(b).requires_grad;
  NodeId id = static_cast<NodeId>(nodes_.size());
  n.back = [this, a, b, id] {
    const Tensor<T>& g = nodes_[id].grad;
    if (nodes_[a].requires_grad)
      for (size_t i = 0; i < g.v.size(); ++i) nodes_[a].grad.v[i] += g.v[i];
    if (nodes_[b].requires_grad)
      for (size_t i = 0; i < g.v.size(); ++i) nodes_[b].grad.v[i] -= g.v[i];
  };
  return push(std::move(n));
}

template <typename T>
NodeId Graph<T>::mul(NodeId a, NodeId b) {
  const Tensor<T>& A = node(a).value;
  const Tensor<T>& B = node(b).value;
  if (A.shape != B.shape) shape_error("mul", A, B);
  Tensor<T> out(A.shape);
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] = A.v[i] * B.v[i];
  check_finite("mul", out);

  Node n;
  n.op = "mul";
  n.inputs = {a, b};
  n.value = std::move(out);
  n.requires_grad = node(a).requires_grad || node(b).requires_grad;
  NodeId id = static_cast<NodeId>(nodes_.size());
  n.back = [this, a, b, id] {
    const Tensor<T>& g = nodes_[id].grad;
    const Tensor<T>& A = nodes_[a].value;
    const Tensor<T>& B = nodes_[b].value;
    if (nodes_[a].requires_grad)
      for (size_t i = 0; i < g.v.size(); ++i) nodes_[a].grad.v[i] += g.v[i] * B.v[i];
    if (nodes_[b].requires_grad)
      for (size_t i = 0; i < g.v.size(); ++i) nodes_[b].grad.v[i] += g.v[i] * A.v[i];
  };
  return push(std::move(n));
}

template <typename T>
NodeId Graph<T>::emin(NodeId a, NodeId b) {
  const Tensor<T>& A = node(a).value;
  const Tensor<T>& B = node(b).value;
  if (A.shape != B.shape) shape_error("min", A, B);
  Tensor<T> out(A.shape);
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] = std::min(A.v[i], B.v[i]);
  check_finite("min", out);

  Node n;
  n.op = "min";
  n.inputs = {a, b};
  n.value = std::move(out);
  n.requires_grad = node(a).requires_grad || node(b).requires_grad;
  NodeId id = static_cast<NodeId>(nodes_.size());
  // Ties route the gradient to the first argument.
  n.back = [this, a, b, id] {
    const Tensor<T>& g = nodes_[id].grad;
    const Tensor<T>& A = nodes_[a].value;
    const Tensor<T>& B = nodes_[b].value;
    for (size_t i = 0; i < g.v.size(); ++i) {
      if (A.v[i] <= B.v[i]) {
        if (nodes_[a].requires_grad) nodes_[a].grad.v[i] += g.v[i];
      } else {
        if (nodes_[b].requires_grad) nodes_[b].grad.v[i] += g.v[i];
      }
    }
  };
  return push(std::move(n));
}

template <typename T>
NodeId Graph<T>::scale(NodeId a, double k) {
  const Tensor<T>& A = node(a).value;
  Tensor<T> out(A.shape);
  for (size_t i = 0; i < out.v.size(); ++i)
    out.v[i] = static_cast<T>(static_cast<double>(A.v[i]) * k);
  check_finite("scale", out);

  Node n;
  n.op = "scale";
  n.inputs = {a};
  n.value = std::move(out);
  n.requires_grad = node(a).requires_grad;
  NodeId id = static_cast<NodeId>(nodes_.size());
  n.back = [this, a, id, k] {
    if (!nodes_[a].requires_grad) return;
    const Tensor<T>& g = nodes_[id].grad;
    for (size_t i = 0; i < g.v.size(); ++i)
      nodes_[a].grad.v[i] += static_cast<T>(static_cast<double>(g.v[i]) * k);
  };
  return push(std::move(n));
}

template <typename T>
NodeId Graph<T>::tanh_op(NodeId a) {
  const Tensor<T>& A = node(a).value;
  Tensor<T> out(A.shape);
  for (size_t i = 0; i < out.v.size(); ++i)
    out.v[i] = static_cast<T>(std::tanh(static_cast<double>(A.v[i])));
  check_finite("tanh", out);

  Node n;
  n.op = "tanh";
  n.inputs = {a};
  n.value = std::move(out);
  n.requires_grad = node(a).requires_grad;
  NodeId id = static_cast<NodeId>(nodes_.size());
  n.back = [this, a, id] {
    if (!nodes_[a].requires_grad) return;
    const Tensor<T>& g = nodes_[id].grad;
    const Tensor<T>& y = nodes_[id].value;
    for (size_t i = 0; i < g.v.size(); ++i)
      nodes_[a].grad.v[i] += g.v[i] * (T(1) - y.v[i] * y.v[i]);
  };
  return push(std::move(n));
}

template <typename T>
NodeId Graph<T>::sigmoid(NodeId a) {
  const Tensor<T>& A = node(a).value;
  Tensor<T> out(A.shape);
  for (size_t i = 0; i < out.v.size(); ++i)
    out.v[i] = static_cast<T>(1.0 / (1.0 + std::exp(-static_cast<double>(A.v[i]))));
  check_finite("sigmoid", out);

  Node n;
  n.op = "sigmoid";
  n.inputs = {a};
  n.value = std::move(out);
  n.requires_grad = node(a).requires_grad;
  NodeId id = static_cast<NodeId>(nodes_.size());
  n.back = [this, a, id] {
    if (!nodes_[a].requires_grad) return;
    const Tensor<T>& g = nodes_[id].grad;
    const Tensor<T>& y = nodes_[id].value;
    for (size_t i = 0; i < g.v.size(); ++i)
      nodes_[a].grad.v[i] += g.v[i] * y.v[i] * (T(1) - y.v[i]);
  };
  return push(std::move(n));
}

template <typename T>
NodeId Graph<T>::log_op(NodeId a) {
  const Tensor<T>& A = node(a).value;
  Tensor<T> out(A.shape);
  for (size_t i = 0; i < out.v.size(); ++i)
    out.v[i] = static_cast<T>(std::log(static_cast<double>(A.v[i])));
  check_finite("log", out);

  Node n;
  n.op = "log";
  n.inputs = {a};
  n.value = std::move(out);
  n.requires_grad = node(a).requires_grad;
  NodeId id = static_cast<NodeId>(nodes_.size());
  n.back = [this, a, id] {
    if (!nodes_[a].requires_grad) return;
    const Tensor<T>& g = nodes_[id].grad;
    const Tensor<T>& x = nodes_[a].value;
    for (size_t i = 0; i < g.v.size(); ++i) nodes_[a].grad.v[i] += g.v[i] / x.v[i];
  };
  return push(std::move(n));
}

template <typename T>
NodeId Graph<T>::clamp(NodeId a, double lo, double hi) {
  const Tensor<T>& A = node(a).value;
  Tensor<T> out(A.shape);
  for (size_t i = 0; i < out.v.size(); ++i) {
    double x = static_cast<double>(A.v[i]);
    out.v[i] = static_cast<T>(std::min(std::max(x, lo), hi));
  }
  check_finite("clamp", out);

  Node n;
  n.op = "clamp";
  n.inputs = {a};
  n.value = std::move(out);
  n.requires_grad = node(a).requires_grad;
  NodeId id = static_cast<NodeId>(nodes_.size());
  n.back = [this, a, id, lo, hi] {
    if (!nodes_[a].requires_grad) return;
    const Tensor<T>& g = nodes_[id].grad;
    const Tensor<T>& x = nodes_[a].value;
    for (size_t i = 0; i < g.v.size(); ++i) {
      double xv = static_cast<double>(x.v[i]);
      if (xv > lo && xv < hi) nodes_[a].grad.v[i] += g.v[i];
    }
  };
  return push(std::move(n));
}

template <typename T>
NodeId Graph<T>::softmax(NodeId a) {
  Tensor<T> ones(node(a).value.shape);
  for (auto& x : ones.v) x = T(1);
  return masked_softmax(a, ones);
}

template <typename T>
NodeId Graph<T>::masked_softmax(NodeId a, const Tensor<T>& mask) {
  const Tensor<T>& A = node(a).value;
  if (A.shape != mask.shape) shape_error("masked_softmax", A, mask);
  const int r = A.rows(), c = A.cols();
  Tensor<T> out(A.shape);
  for (int i = 0; i < r; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < c; ++j)
      if (mask.at(i, j) != T(0)) mx = std::max(mx, static_cast<double>(A.at(i, j)));
    if (!std::isfinite(mx))
      fail("masked_softmax: row ", i, " has no unmasked positions");
    double z = 0.0;
    for (int j = 0; j < c; ++j)
      if (mask.at(i, j) != T(0)) z += std::exp(static_cast<double>(A.at(i, j)) - mx);
    for (int j = 0; j < c; ++j)
      out.at(i, j) = mask.at(i, j) != T(0)
                         ? static_cast<T>(std::exp(static_cast<double>(A.at(i, j)) - mx) / z)
                         : T(0);
  }
  check_finite("masked_softmax", out);

  Node n;
  n.op = "masked_softmax";
  n.inputs = {a};
  n.value = std::move(out);
  n.requires_grad = node(a).requires_grad;
  NodeId id = static_cast<NodeId>(nodes_.size());
  n.back = [this, a, id] {
    if (!nodes_[a].requires_grad) return;
    const Tensor<T>& g = nodes_[id].grad;
    const Tensor<T>& y = nodes_[id].value;
    const int r = y.rows(), c = y.cols();
    for (int i = 0; i < r; ++i) {
      double dot = 0.0;
      for (int j = 0; j < c; ++j)
        dot += static_cast<double>(g.at(i, j)) * static_cast<double>(y.at(i, j));
      for (int j = 0; j < c; ++j)
        nodes_[a].grad.at(i, j) += static_cast<T>(
            static_cast<double>(y.at(i, j)) * (static_cast<double>(g.at(i, j)) - dot));
    }
  };
  return push(std::move(n));
}

template <typename T>
NodeId Graph<T>::transpose(NodeId a) {
  const Tensor<T>& A = node(a).value;
  if (A.shape.size() != 2) fail("transpose: rank-2 tensor required, got ", A.shape_str());
  const int r = A.rows(), c = A.cols();
  Tensor<T> out({c, r});
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) out.at(j, i) = A.at(i, j);

  Node n;
  n.op = "transpose";
  n.inputs = {a};
  n.value = std::move(out);
  n.requires_grad = node(a).requires_grad;
  NodeId id = static_cast<NodeId>(nodes_.size());
  n.back = [this, a, id] {
    if (!nodes_[a].requires_grad) return;
    const Tensor<T>& g = nodes_[id].grad;
    const int r = g.rows(), c = g.cols();
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) nodes_[a].grad.at(j, i) += g.at(i, j);
  };
  return push(std::move(n));
}

template <typename T>
NodeId Graph<T>::concat_cols(std::span<const NodeId> xs) {
  if (xs.empty()) fail("concat_cols: no inputs");
  const int r = node(xs[0]).value.rows();
  int c = 0;
  for (NodeId x : xs) {
    const Tensor<T>& t = node(x).value;
    if (t.shape.size() != 2 || t.rows() != r)
      fail("concat_cols: row mismatch, ", t.shape_str(), " vs ", r, " rows");
    c += t.cols();
  }
  Tensor<T> out({r, c});
  int off = 0;
  for (NodeId x : xs) {
    const Tensor<T>& t = node(x).value;
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < t.cols(); ++j) out.at(i, off + j) = t.at(i, j);
    off += t.cols();
  }

  Node n;
  n.op = "concat_cols";
  n.inputs.assign(xs.begin(), xs.end());
  n.value = std::move(out);
  for (NodeId x : xs) n.requires_grad = n.requires_grad || node(x).requires_grad;
  NodeId id = static_cast<NodeId>(nodes_.size());
  std::vector<NodeId> ins(xs.begin(), xs.end());
  n.back = [this, ins, id] {
    const Tensor<T>& g = nodes_[id].grad;
    const int r = g.rows();
    int off = 0;
    for (NodeId x : ins) {
      const int c = nodes_[x].value.cols();
      if (nodes_[x].requires_grad)
        for (int i = 0; i < r; ++i)
          for (int j = 0; j < c; ++j) nodes_[x].grad.at(i, j) += g.at(i, off + j);
      off += c;
    }
  };
  return push(std::move(n));
}

template <typename T>
NodeId Graph<T>::concat_rows(std::span<const NodeId> xs) {
  if (xs.empty()) fail("concat_rows: no inputs");
  const int c = node(xs[0]).value.cols();
  int r = 0;
  for (NodeId x : xs) {
    const Tensor<T>& t = node(x).value;
    if (t.shape.size() != 2 || t.cols() != c)
      fail("concat_rows: column mismatch, ", t.shape_str(), " vs ", c, " cols");
    r += t.rows();
  }
  Tensor<T> out({r, c});
  int off = 0;
  for (NodeId x : xs) {
    const Tensor<T>& t = node(x).value;
    for (int i = 0; i < t.rows(); ++i)
      for (int j = 0; j < c; ++j) out.at(off + i, j) = t.at(i, j);
    off += t.rows();
  }

  Node n;
  n.op = "concat_rows";
  n.inputs.assign(xs.begin(), xs.end());
  n.value = std::move(out);
  for (NodeId x : xs) n.requires_grad = n.requires_grad || node(x).requires_grad;
  NodeId id = static_cast<NodeId>(nodes_.size());
  std::vector<NodeId> ins(xs.begin(), xs.end());
  n.back = [this, ins, id] {
    const Tensor<T>& g = nodes_[id].grad;
    const int c = g.cols();
    int off = 0;
    for (NodeId x : ins) {
      const int r = nodes_[x].value.rows();
      if (nodes_[x].requires_grad)
        for (int i = 0; i < r; ++i)
          for (int j = 0; j < c; ++j) nodes_[x].grad.at(i, j) += g.at(off + i, j);
      off += r;
    }
  };
  return push(std::move(n));
}

template <typename T>
NodeId Graph<T>::slice_cols(NodeId a, int begin, int end) {
  const Tensor<T>& A = node(a).value;
  if (begin < 0 || end > A.cols() || begin >= end)
    fail("slice_cols: range [", begin, ",", end, ") invalid for ", A.shape_str());
  const int r = A.rows(), c = end - begin;
  Tensor<T> out({r, c});
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) out.at(i, j) = A.at(i, begin + j);

  Node n;
  n.op = "slice_cols";
  n.inputs = {a};
  n.value = std::move(out);
  n.requires_grad = node(a).requires_grad;
  NodeId id = static_cast<NodeId>(nodes_.size());
  n.back = [this, a, id, begin] {
    if (!nodes_[a].requires_grad) return;
    const Tensor<T>& g = nodes_[id].grad;
    for (int i = 0; i < g.rows(); ++i)
      for (int j = 0; j < g.cols(); ++j) nodes_[a].grad.at(i, begin + j) += g.at(i, j);
  };
  return push(std::move(n));
}

template <typename T>
NodeId Graph<T>::sum(NodeId a) {
  const Tensor<T>& A = node(a).value;
  double acc = 0.0;
  for (T x : A.v) acc += static_cast<double>(x);
  Tensor<T> out({1, 1});
  out.v[0] = static_cast<T>(acc);
  check_finite("sum", out);

  Node n;
  n.op = "sum";
  n.inputs = {a};
  n.value = std::move(out);
  n.requires_grad = node(a).requires_grad;
  NodeId id = static_cast<NodeId>(nodes_.size());
  n.back = [this, a, id] {
    if (!nodes_[a].requires_grad) return;
    const T g = nodes_[id].grad.v[0];
    for (auto& x : nodes_[a].grad.v) x += g;
  };
  return push(std::move(n));
}

template <typename T>
NodeId Graph<T>::mean(NodeId a) {
  const Tensor<T>& A = node(a).value;
  double acc = 0.0;
  for (T x : A.v) acc += static_cast<double>(x);
  const double inv = 1.0 / static_cast<double>(A.numel());
  Tensor<T> out({1, 1});
  out.v[0] = static_cast<T>(acc * inv);
  check_finite("mean", out);

  Node n;
  n.op = "mean";
  n.inputs = {a};
  n.value = std::move(out);
  n.requires_grad = node(a).requires_grad;
  NodeId id = static_cast<NodeId>(nodes_.size());
  n.back = [this, a, id, inv] {
    if (!nodes_[a].requires_grad) return;
    const double g = static_cast<double>(nodes_[id].grad.v[0]) * inv;
    for (auto& x : nodes_[a].grad.v) x += static_cast<T>(g);
  };
  return push(std::move(n));
}

template <typename T>
NodeId Graph<T>::rows(NodeId table, std::vector<int> ids) {
  const Tensor<T>& A = node(table).value;
  if (A.shape.size() != 2) fail("rows: rank-2 table required, got ", A.shape_str());
  const int c = A.cols();
  for (int idx : ids)
    if (idx < 0 || idx >= A.rows())
      fail("rows: id ", idx, " out of range for table ", A.shape_str());
  Tensor<T> out({static_cast<int>(ids.size()), c});
  for (size_t i = 0; i < ids.size(); ++i)
    for (int j = 0; j < c; ++j) out.at(static_cast<int>(i), j) = A.at(ids[i], j);

  Node n;
  n.op = "rows";
  n.inputs = {table};
  n.value = std::move(out);
  n.requires_grad = node(table).requires_grad;
  NodeId id = static_cast<NodeId>(nodes_.size());
  n.back = [this, table, id, ids] {
    if (!nodes_[table].requires_grad) return;
    const Tensor<T>& g = nodes_[id].grad;
    for (size_t i = 0; i < ids.size(); ++i)
      for (int j = 0; j < g.cols(); ++j)
        nodes_[table].grad.at(ids[i], j) += g.at(static_cast<int>(i), j);
  };
  return push(std::move(n));
}

template <typename T>
NodeId Graph<T>::scatter_add_cols(NodeId a, std::vector<int> ids, int width) {
  const Tensor<T>& A = node(a).value;
  if (A.rows() != 1 || static_cast<size_t>(A.cols()) != ids.size())
    fail("scatter_add_cols: need [1 x ", ids.size(), "] input, got ", A.shape_str());
  for (int idx : ids)
    if (idx < 0 || idx >= width)
      fail("scatter_add_cols: id ", idx, " out of range for width ", width);
  Tensor<T> out({1, width});
  for (size_t i = 0; i < ids.size(); ++i)
    out.at(0, ids[i]) += A.at(0, static_cast<int>(i));

  Node n;
  n.op = "scatter_add_cols";
  n.inputs = {a};
  n.value = std::move(out);
  n.requires_grad = node(a).requires_grad;
  NodeId id = static_cast<NodeId>(nodes_.size());
  n.back = [this, a, id, ids] {
    if (!nodes_[a].requires_grad) return;
    const Tensor<T>& g = nodes_[id].grad;
    for (size_t i = 0; i < ids.size(); ++i)
      nodes_[a].grad.at(0, static_cast<int>(i)) += g.at(0, ids[i]);
  };
  return push(std::move(n));
}

template <typename T>
NodeId Graph<T>::pad_cols(NodeId a, int width) {
  const Tensor<T>& A = node(a).value;
  if (width < A.cols()) fail("pad_cols: width ", width, " < ", A.shape_str());
  Tensor<T> out({A.rows(), width});
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j) out.at(i, j) = A.at(i, j);

  Node n;
  n.op = "pad_cols";
  n.inputs = {a};
  n.value = std::move(out);
  n.requires_grad = node(a).requires_grad;
  NodeId id = static_cast<NodeId>(nodes_.size());
  n.back = [this, a, id] {
    if (!nodes_[a].requires_grad) return;
    const Tensor<T>& g = nodes_[id].grad;
    Tensor<T>& gA = nodes_[a].grad;
    for (int i = 0; i < gA.rows(); ++i)
      for (int j = 0; j < gA.cols(); ++j) gA.at(i, j) += g.at(i, j);
  };
  return push(std::move(n));
}

template <typename T>
NodeId Graph<T>::pick(NodeId a, int r, int c) {
  const Tensor<T>& A = node(a).value;
  if (r < 0 || r >= A.rows() || c < 0 || c >= A.cols())
    fail("pick: (", r, ",", c, ") out of range for ", A.shape_str());
  Tensor<T> out({1, 1});
  out.v[0] = A.at(r, c);

  Node n;
  n.op = "pick";
  n.inputs = {a};
  n.value = std::move(out);
  n.requires_grad = node(a).requires_grad;
  NodeId id = static_cast<NodeId>(nodes_.size());
  n.back = [this, a, id, r, c] {
    if (!nodes_[a].requires_grad) return;
    nodes_[a].grad.at(r, c) += nodes_[id].grad.v[0];
  };
  return push(std::move(n));
}

template <typename T>
NodeId Graph<T>::unary_custom(
    const std::string& name, NodeId a,
    std::function<Tensor<T>(const Tensor<T>&)> fwd,
    std::function<void(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,
                       Tensor<T>&)>
        bwd) {
  Tensor<T> out = fwd(node(a).value);
  check_finite(name.c_str(), out);

  Node n;
  n.op = name;
  n.inputs = {a};
  n.value = std::move(out);
  n.requires_grad = node(a).requires_grad;
  NodeId id = static_cast<NodeId>(nodes_.size());
  n.back = [this, a, id, bwd] {
    if (!nodes_[a].requires_grad) return;
    bwd(nodes_[a].value, nodes_[id].value, nodes_[id].grad, nodes_[a].grad);
  };
  return push(std::move(n));
}

template <typename T>
void Graph<T>::backward(NodeId loss) {
  const Node& l = node(loss);  // also validates the id (connectivity)
  if (l.value.numel() != 1)
    fail("backward: loss must be scalar, got ", l.value.shape_str());

  // Mark ancestors of the loss so unrelated subgraphs are skipped.
  std::vector<char> reach(nodes_.size(), 0);
  std::vector<NodeId> stack = {loss};
  reach[static_cast<size_t>(loss)] = 1;
  while (!stack.empty()) {
    NodeId id = stack.back();
    stack.pop_back();
    for (NodeId in : nodes_[static_cast<size_t>(id)].inputs)
      if (!reach[static_cast<size_t>(in)]) {
        reach[static_cast<size_t>(in)] = 1;
        stack.push_back(in);
      }
  }

  // Every requires_grad node gets a zero gradient; disconnected leaves
  // legitimately hold d(loss)/d(leaf) = 0.
  for (size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].requires_grad) ensure_grad(static_cast<NodeId>(i));
  ensure_grad(loss);
  node_mut(loss).grad.v[0] = T(1);

  for (NodeId id = loss; id >= 0; --id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (reach[static_cast<size_t>(id)] && n.requires_grad && n.back) n.back();
  }
}

template <typename T>
double grad_check(
    const std::function<NodeId(Graph<T>&, const std::vector<NodeId>&)>& build,
    std::vector<Tensor<T>> point, double step) {
  if (step <= 0) fail("grad_check: step must be positive");

  auto eval = [&](const std::vector<Tensor<T>>& at, std::vector<Tensor<T>>* grads) {
    Graph<T> g;
    std::vector<NodeId> leaves;
    leaves.reserve(at.size());
    for (const auto& t : at) leaves.push_back(g.param(t));
    NodeId loss = build(g, leaves);
    double out = static_cast<double>(g.val(loss).v[0]);
    if (grads) {
      g.backward(loss);
      grads->clear();
      for (NodeId id : leaves) grads->push_back(g.grad(id));
    }
    return out;
  };

  std::vector<Tensor<T>> analytic;
  eval(point, &analytic);

  double max_err = 0.0;
  for (size_t k = 0; k < point.size(); ++k) {
    for (size_t i = 0; i < point[k].v.size(); ++i) {
      const T orig = point[k].v[i];
      point[k].v[i] = static_cast<T>(static_cast<double>(orig) + step);
      double fp = eval(point, nullptr);
      point[k].v[i] = static_cast<T>(static_cast<double>(orig) - step);
      double fm = eval(point, nullptr);
      point[k].v[i] = orig;
      const double fd = (fp - fm) / (2.0 * step);
      const double a = static_cast<double>(analytic[k].v[i]);
      const double err = std::abs(a - fd) / std::max(1.0, std::abs(fd));
      max_err = std::max(max_err, err);
    }
  }
  return max_err;
}

template class Graph<float>;
template class Graph<double>;
template double grad_check<float>(
    const std::function<NodeId(Graph<float>&, const std::vector<NodeId>&)>&,
    std::vector<Tensor<float>>, double);
template double grad_check<double>(
    const std::function<NodeId(Graph<double>&, const std::vector<NodeId>&)>&,
    std::vector<Tensor<double>>, double);

}  // namespace pgnet::ad
