#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pgnet/adagrad.hpp"
#include "pgnet/graph.hpp"

using pgnet::PgnetError;
using pgnet::Rng;
using pgnet::ad::Graph;
using pgnet::ad::GraphD;
using pgnet::ad::GraphF;
using pgnet::ad::NodeId;
using pgnet::ad::Tensor;
using pgnet::ad::TensorD;
using pgnet::ad::TensorF;

namespace {

TensorD rand_tensor(int r, int c, Rng& rng, double lo = -1.0, double hi = 1.0) {
  TensorD t({r, c});
  for (auto& x : t.v) x = rng.uniform(lo, hi);
  return t;
}

using Build = std::function<NodeId(GraphD&, const std::vector<NodeId>&)>;

double fd_check(const Build& build, std::vector<TensorD> point) {
  return pgnet::ad::grad_check<double>(build, std::move(point), 1e-4);
}

}  // namespace

TEST_SUITE("primitives") {
  TEST_CASE("sigmoid at zero is one half") {
    GraphD g;
    NodeId x = g.value(TensorD::zeros(1, 1));
    CHECK(g.val(g.sigmoid(x)).v[0] == doctest::Approx(0.5).epsilon(1e-12));
  }

  TEST_CASE("softmax of equal logits is uniform") {
    GraphD g;
    NodeId x = g.value(TensorD::zeros(1, 3));
    const auto& y = g.val(g.softmax(x));
    for (double v : y.v) CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-12));
  }

  TEST_CASE("elementwise min") {
    GraphD g;
    NodeId a = g.value(TensorD::row({0.3, 0.7}));
    NodeId b = g.value(TensorD::row({0.5, 0.2}));
    const auto& y = g.val(g.emin(a, b));
    CHECK(y.v[0] == doctest::Approx(0.3));
    CHECK(y.v[1] == doctest::Approx(0.2));
  }

  TEST_CASE("softmax rows are distributions") {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
      GraphD g;
      NodeId x = g.value(rand_tensor(3, 5, rng, -10, 10));
      const auto& y = g.val(g.softmax(x));
      for (int i = 0; i < 3; ++i) {
        double sum = 0;
        for (int j = 0; j < 5; ++j) {
          CHECK(y.at(i, j) >= 0);
          sum += y.at(i, j);
        }
        CHECK(std::abs(sum - 1.0) < 1e-9);
      }
    }
  }

  TEST_CASE("shape errors name the op and shapes") {
    GraphD g;
    NodeId a = g.value(TensorD::zeros(2, 3));
    NodeId b = g.value(TensorD::zeros(4, 5));
    CHECK_THROWS_WITH_AS(g.matmul(a, b),
                         doctest::Contains("matmul: shape mismatch [2,3] vs [4,5]"),
                         PgnetError);
  }

  TEST_CASE("non-finite outputs are hard errors") {
    GraphD g;
    NodeId zero = g.value(TensorD::zeros(1, 1));
    CHECK_THROWS_WITH_AS(g.log_op(zero), doctest::Contains("non-finite"), PgnetError);
  }

  TEST_CASE("graph evaluation is deterministic") {
    auto run = [] {
      Rng rng(99);
      GraphF g;
      NodeId a = g.param(rand_tensor(4, 4, rng).cast<float>());
      NodeId b = g.param(rand_tensor(4, 4, rng).cast<float>());
      NodeId loss = g.mean(g.tanh_op(g.matmul(a, b)));
      return g.val(loss).v[0];
    };
    const float x = run();
    const float y = run();
    CHECK(std::memcmp(&x, &y, sizeof(float)) == 0);
  }
}

TEST_SUITE("backward") {
  TEST_CASE("sigmoid derivative at zero is 0.25") {
    GraphD g;
    NodeId x = g.param(TensorD::zeros(1, 1));
    NodeId loss = g.sigmoid(x);
    g.backward(loss);
    CHECK(g.grad(x).v[0] == doctest::Approx(0.25).epsilon(1e-12));
  }

  TEST_CASE("d sum(a*b) / da equals b") {
    GraphD g;
    NodeId a = g.param(TensorD::row({1, 2}));
    NodeId b = g.value(TensorD::row({3, 4}));
    g.backward(g.sum(g.mul(a, b)));
    CHECK(g.grad(a).v[0] == doctest::Approx(3));
    CHECK(g.grad(a).v[1] == doctest::Approx(4));
  }

  TEST_CASE("random affine+tanh network matches finite differences") {
    Rng rng(11);
    std::vector<TensorD> point = {rand_tensor(3, 4, rng), rand_tensor(1, 4, rng),
                                  rand_tensor(1, 3, rng)};
    const double err = fd_check(
        [](GraphD& g, const std::vector<NodeId>& in) {
          // x W + b through tanh, reduced to a scalar
          return g.mean(g.tanh_op(g.add(g.matmul(in[2], in[0]), in[1])));
        },
        point);
    CHECK(err < 1e-4);
  }

  TEST_CASE("loss must be scalar") {
    GraphD g;
    NodeId x = g.param(TensorD::zeros(2, 2));
    CHECK_THROWS_WITH_AS(g.backward(g.tanh_op(x)),
                         doctest::Contains("loss must be scalar"), PgnetError);
  }

  TEST_CASE("loss must belong to the graph") {
    GraphD g;
    g.param(TensorD::zeros(1, 1));
    CHECK_THROWS_WITH_AS(g.backward(42), doctest::Contains("not in graph"),
                         PgnetError);
  }

  TEST_CASE("disconnected parameters get zero gradients") {
    GraphD g;
    NodeId used = g.param(TensorD::row({2.0}));
    NodeId unused = g.param(TensorD::row({5.0}));
    g.backward(g.sum(g.mul(used, used)));
    CHECK(g.grad(used).v[0] == doctest::Approx(4.0));
    CHECK(g.grad(unused).v[0] == 0.0);
  }
}

TEST_SUITE("gradient checker") {
  TEST_CASE("identity has zero error") {
    const double err = fd_check(
        [](GraphD& g, const std::vector<NodeId>& in) { return g.sum(in[0]); },
        {TensorD::row({0.3, -0.4, 1.7})});
    CHECK(err == doctest::Approx(0).epsilon(1e-10));
  }

  TEST_CASE("attention-style step passes") {
    Rng rng(5);
    // e_i = v^T tanh(W_h h_i + W_s s + w_c c_i + b); loss = sum softmax
    std::vector<TensorD> point = {
        rand_tensor(3, 8, rng),          // h rows (n=3, width 8)
        rand_tensor(8, 6, rng),          // W_h
        rand_tensor(1, 4, rng),          // s
        rand_tensor(4, 6, rng),          // W_s
        rand_tensor(1, 6, rng),          // w_c
        rand_tensor(3, 1, rng, 0, 1.5),  // coverage column, nonnegative
        rand_tensor(1, 6, rng),          // b
        rand_tensor(6, 1, rng),          // v
    };
    const double err = fd_check(
        [](GraphD& g, const std::vector<NodeId>& in) {
          NodeId feats = g.add(g.matmul(in[0], in[1]), g.matmul(in[2], in[3]));
          feats = g.add(feats, g.matmul(in[5], in[4]));
          feats = g.add(feats, in[6]);
          NodeId scores = g.matmul(g.tanh_op(feats), in[7]);
          NodeId attn = g.softmax(g.transpose(scores));
          // weight the attention so the gradient is not identically zero
          return g.sum(g.mul(attn, attn));
        },
        point);
    CHECK(err < 1e-4);
  }

  TEST_CASE("a broken backward rule is detected") {
    Rng rng(17);
    auto broken_tanh = [](GraphD& g, NodeId x) {
      return g.unary_custom(
          "broken_tanh", x,
          [](const TensorD& in) {
            TensorD out(in.shape);
            for (size_t i = 0; i < in.v.size(); ++i) out.v[i] = std::tanh(in.v[i]);
            return out;
          },
          [](const TensorD&, const TensorD& y, const TensorD& gy, TensorD& gx) {
            // sign flip
            for (size_t i = 0; i < gy.v.size(); ++i)
              gx.v[i] += -(1.0 - y.v[i] * y.v[i]) * gy.v[i];
          });
    };
    const double err = fd_check(
        [&](GraphD& g, const std::vector<NodeId>& in) {
          return g.sum(broken_tanh(g, in[0]));
        },
        {rand_tensor(2, 3, rng)});
    CHECK(err > 1e-2);
  }
}

TEST_SUITE("primitive gradients vs finite differences") {
  // Twenty random points per primitive, relative error under 1e-4.
  TEST_CASE("all primitives") {
    struct Case {
      const char* name;
      Build build;
      std::function<std::vector<TensorD>(Rng&)> point;
    };

    const std::vector<Case> cases = {
        {"matmul",
         [](GraphD& g, const std::vector<NodeId>& in) {
           return g.sum(g.matmul(in[0], in[1]));
         },
         [](Rng& r) {
           return std::vector<TensorD>{rand_tensor(2, 3, r), rand_tensor(3, 4, r)};
         }},
        {"add",
         [](GraphD& g, const std::vector<NodeId>& in) {
           return g.sum(g.mul(g.add(in[0], in[1]), in[0]));
         },
         [](Rng& r) {
           return std::vector<TensorD>{rand_tensor(3, 4, r), rand_tensor(3, 4, r)};
         }},
        {"add row broadcast",
         [](GraphD& g, const std::vector<NodeId>& in) {
           return g.sum(g.mul(g.add(in[0], in[1]), in[0]));
         },
         [](Rng& r) {
           return std::vector<TensorD>{rand_tensor(3, 4, r), rand_tensor(1, 4, r)};
         }},
        {"sub",
         [](GraphD& g, const std::vector<NodeId>& in) {
           return g.sum(g.mul(g.sub(in[0], in[1]), in[0]));
         },
         [](Rng& r) {
           return std::vector<TensorD>{rand_tensor(2, 2, r), rand_tensor(2, 2, r)};
         }},
        {"mul",
         [](GraphD& g, const std::vector<NodeId>& in) {
           return g.sum(g.mul(in[0], in[1]));
         },
         [](Rng& r) {
           return std::vector<TensorD>{rand_tensor(2, 3, r), rand_tensor(2, 3, r)};
         }},
        {"min",
         [](GraphD& g, const std::vector<NodeId>& in) {
           return g.sum(g.emin(in[0], in[1]));
         },
         [](Rng& r) {
           // keep coordinates separated so the kink is far from the probe
           TensorD a = rand_tensor(2, 3, r);
           TensorD b = a;
           for (auto& x : b.v) x += (r.uniform() < 0.5 ? 1 : -1) * r.uniform(0.1, 0.5);
           return std::vector<TensorD>{a, b};
         }},
        {"scale",
         [](GraphD& g, const std::vector<NodeId>& in) {
           return g.sum(g.scale(in[0], -2.5));
         },
         [](Rng& r) { return std::vector<TensorD>{rand_tensor(2, 3, r)}; }},
        {"tanh",
         [](GraphD& g, const std::vector<NodeId>& in) {
           return g.sum(g.tanh_op(in[0]));
         },
         [](Rng& r) { return std::vector<TensorD>{rand_tensor(2, 3, r)}; }},
        {"sigmoid",
         [](GraphD& g, const std::vector<NodeId>& in) {
           return g.sum(g.sigmoid(in[0]));
         },
         [](Rng& r) { return std::vector<TensorD>{rand_tensor(2, 3, r)}; }},
        {"log",
         [](GraphD& g, const std::vector<NodeId>& in) {
           return g.sum(g.log_op(in[0]));
         },
         [](Rng& r) {
           return std::vector<TensorD>{rand_tensor(2, 3, r, 0.5, 2.0)};
         }},
        {"clamp",
         [](GraphD& g, const std::vector<NodeId>& in) {
           return g.sum(g.clamp(in[0], -0.9, 0.9));
         },
         [](Rng& r) {
           TensorD t = rand_tensor(2, 3, r, -2, 2);
           for (auto& x : t.v)  // keep clear of the clamp edges
             if (std::abs(std::abs(x) - 0.9) < 0.05) x += 0.1;
           return std::vector<TensorD>{t};
         }},
        {"softmax",
         [](GraphD& g, const std::vector<NodeId>& in) {
           return g.sum(g.mul(g.softmax(in[0]), in[0]));
         },
         [](Rng& r) { return std::vector<TensorD>{rand_tensor(2, 4, r)}; }},
        {"masked_softmax",
         [](GraphD& g, const std::vector<NodeId>& in) {
           TensorD mask({2, 4}, {1, 1, 0, 1, 1, 0, 1, 1});
           return g.sum(g.mul(g.masked_softmax(in[0], mask), in[0]));
         },
         [](Rng& r) { return std::vector<TensorD>{rand_tensor(2, 4, r)}; }},
        {"transpose",
         [](GraphD& g, const std::vector<NodeId>& in) {
           return g.sum(g.matmul(g.transpose(in[0]), in[0]));
         },
         [](Rng& r) { return std::vector<TensorD>{rand_tensor(2, 3, r)}; }},
        {"concat_cols",
         [](GraphD& g, const std::vector<NodeId>& in) {
           const NodeId xs[] = {in[0], in[1]};
           NodeId cat = g.concat_cols(xs);
           return g.sum(g.mul(cat, cat));
         },
         [](Rng& r) {
           return std::vector<TensorD>{rand_tensor(2, 3, r), rand_tensor(2, 2, r)};
         }},
        {"concat_rows",
         [](GraphD& g, const std::vector<NodeId>& in) {
           const NodeId xs[] = {in[0], in[1]};
           NodeId cat = g.concat_rows(xs);
           return g.sum(g.mul(cat, cat));
         },
         [](Rng& r) {
           return std::vector<TensorD>{rand_tensor(2, 3, r), rand_tensor(1, 3, r)};
         }},
        {"slice_cols",
         [](GraphD& g, const std::vector<NodeId>& in) {
           NodeId s = g.slice_cols(in[0], 1, 3);
           return g.sum(g.mul(s, s));
         },
         [](Rng& r) { return std::vector<TensorD>{rand_tensor(2, 4, r)}; }},
        {"sum",
         [](GraphD& g, const std::vector<NodeId>& in) {
           return g.mul(g.sum(in[0]), g.sum(in[0]));
         },
         [](Rng& r) { return std::vector<TensorD>{rand_tensor(2, 3, r)}; }},
        {"mean",
         [](GraphD& g, const std::vector<NodeId>& in) {
           return g.mul(g.mean(in[0]), g.mean(in[0]));
         },
         [](Rng& r) { return std::vector<TensorD>{rand_tensor(2, 3, r)}; }},
        {"rows",
         [](GraphD& g, const std::vector<NodeId>& in) {
           NodeId picked = g.rows(in[0], {2, 0, 2});
           return g.sum(g.mul(picked, picked));
         },
         [](Rng& r) { return std::vector<TensorD>{rand_tensor(3, 4, r)}; }},
        {"scatter_add_cols",
         [](GraphD& g, const std::vector<NodeId>& in) {
           NodeId s = g.scatter_add_cols(in[0], {1, 3, 1, 0}, 5);
           return g.sum(g.mul(s, s));
         },
         [](Rng& r) { return std::vector<TensorD>{rand_tensor(1, 4, r)}; }},
        {"pad_cols",
         [](GraphD& g, const std::vector<NodeId>& in) {
           NodeId p = g.pad_cols(in[0], 5);
           return g.sum(g.mul(p, p));
         },
         [](Rng& r) { return std::vector<TensorD>{rand_tensor(2, 3, r)}; }},
        {"pick",
         [](GraphD& g, const std::vector<NodeId>& in) {
           return g.mul(g.pick(in[0], 1, 2), g.pick(in[0], 0, 0));
         },
         [](Rng& r) { return std::vector<TensorD>{rand_tensor(2, 3, r)}; }},
    };

    for (const auto& c : cases) {
      CAPTURE(c.name);
      Rng rng(0xC0FFEE ^ pgnet::fnv1a64(c.name));
      for (int trial = 0; trial < 20; ++trial) {
        const double err = fd_check(c.build, c.point(rng));
        CAPTURE(trial);
        CHECK(err < 1e-4);
      }
    }
  }
}

TEST_SUITE("adagrad") {
  TEST_CASE("hand-computed single step") {
    TensorF theta = TensorF::row({1.0f});
    TensorF grad = TensorF::row({4.0f});
    pgnet::ad::AdagradState st;
    st.learning_rate = 0.15f;
    st.epsilon = 1e-10f;
    st.initial_accumulator = 0.0f;
    st.reset({&theta});
    pgnet::ad::adagrad_step({&theta}, {&grad}, st);
    CHECK(st.acc[0].v[0] == doctest::Approx(16.0));
    CHECK(theta.v[0] == doctest::Approx(1.0 - 0.15 * 4.0 / 4.0).epsilon(1e-6));
  }

  TEST_CASE("zero gradient leaves parameters unchanged") {
    TensorF theta = TensorF::row({0.7f, -0.3f});
    TensorF grad = TensorF::zeros(1, 2);
    pgnet::ad::AdagradState st;
    st.initial_accumulator = 0.1f;
    st.reset({&theta});
    pgnet::ad::adagrad_step({&theta}, {&grad}, st);
    CHECK(theta.v[0] == doctest::Approx(0.7f));
    CHECK(theta.v[1] == doctest::Approx(-0.3f));
  }

  TEST_CASE("two unit-gradient steps decay as 1/sqrt(acc)") {
    TensorF theta = TensorF::row({0.0f});
    TensorF grad = TensorF::row({1.0f});
    pgnet::ad::AdagradState st;
    st.learning_rate = 0.15f;
    st.epsilon = 1e-10f;
    st.initial_accumulator = 0.0f;
    st.reset({&theta});
    pgnet::ad::adagrad_step({&theta}, {&grad}, st);
    CHECK(theta.v[0] == doctest::Approx(-0.15).epsilon(1e-6));
    pgnet::ad::adagrad_step({&theta}, {&grad}, st);
    CHECK(theta.v[0] == doctest::Approx(-0.15 - 0.15 / std::sqrt(2.0)).epsilon(1e-6));
  }

  TEST_CASE("accumulators never decrease") {
    Rng rng(31);
    TensorF theta = TensorF::row({0.1f, 0.2f, 0.3f});
    pgnet::ad::AdagradState st;
    st.reset({&theta});
    std::vector<float> prev = st.acc[0].v;
    for (int step = 0; step < 50; ++step) {
      TensorF grad = rand_tensor(1, 3, rng).cast<float>();
      pgnet::ad::adagrad_step({&theta}, {&grad}, st);
      for (size_t i = 0; i < prev.size(); ++i) {
        CHECK(st.acc[0].v[i] >= prev[i]);
      }
      prev = st.acc[0].v;
    }
  }

  TEST_CASE("global norm clipping") {
    TensorF g1 = TensorF::row({3.0f, 0.0f});
    TensorF g2 = TensorF::row({0.0f, 4.0f});
    pgnet::ad::clip_by_global_norm({&g1, &g2}, 2.0);
    CHECK(pgnet::ad::global_norm({&g1, &g2}) == doctest::Approx(2.0).epsilon(1e-6));
    // direction preserved
    CHECK(g1.v[0] / g2.v[1] == doctest::Approx(0.75).epsilon(1e-6));
    TensorF small = TensorF::row({0.5f});
    pgnet::ad::clip_by_global_norm({&small}, 2.0);
    CHECK(small.v[0] == doctest::Approx(0.5f));
  }
}
