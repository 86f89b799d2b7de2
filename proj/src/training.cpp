#include "pgnet/training.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include <json.hpp>

#include "pgnet/adagrad.hpp"
#include "pgnet/model.hpp"

namespace pgnet {

void TrainingConfig::validate_fields() const {
  if (learning_rate <= 0) fail("config: learning_rate must be positive");
  if (batch_size < 1) fail("config: batch_size must be >= 1");
  if (max_steps < 0) fail("config: max_steps must be >= 0");
  if (coverage_phase_steps < 0) fail("config: coverage_phase_steps must be >= 0");
  if (lambda < 0) fail("config: lambda must be >= 0");
  if (clip_norm <= 0) fail("config: clip_norm must be positive");
  if (validate_every < 1) fail("config: validate_every must be >= 1");
  if (patience < 1) fail("config: patience must be >= 1");
  if (max_article_len < 1 || max_summary_len < 1)
    fail("config: truncation limits must be positive");
}

std::string TrainingConfig::to_json() const {
  nlohmann::json j;
  j["learning_rate"] = learning_rate;
  j["batch_size"] = batch_size;
  j["max_steps"] = max_steps;
  j["coverage_phase_steps"] = coverage_phase_steps;
  j["lambda"] = lambda;
  j["clip_norm"] = clip_norm;
  j["validate_every"] = validate_every;
  j["patience"] = patience;
  j["seed"] = seed;
  j["adagrad_epsilon"] = adagrad_epsilon;
  j["adagrad_initial_accumulator"] = adagrad_initial_accumulator;
  j["max_article_len"] = max_article_len;
  j["max_summary_len"] = max_summary_len;
  return j.dump();
}

std::vector<EncodedExample> encode_corpus(const std::vector<RawExample>& raw,
                                          const Vocabulary& vocab,
                                          int max_article_len, int max_summary_len) {
  std::vector<EncodedExample> out;
  out.reserve(raw.size());
  for (const auto& ex : raw)
    out.push_back(encode_example(tokenize(ex.article), tokenize(ex.summary), vocab,
                                 max_article_len, max_summary_len));
  return out;
}

double validate(const ModelParams& params,
                const std::vector<EncodedExample>& val_set, double lambda,
                bool use_coverage, int batch_size) {
  if (val_set.empty()) fail("validate: empty validation set");
  double total = 0;
  int count = 0;
  for (const Batch& b : make_batches(val_set, batch_size)) {
    ad::GraphF g;
    auto pn = model::bind_params(g, params, /*trainable=*/false);
    ad::NodeId loss = model::sequence_loss(g, pn, b, lambda, use_coverage);
    total += static_cast<double>(g.val(loss).v[0]) * b.size();
    count += b.size();
  }
  return total / count;
}

namespace {

struct BestTracker {
  double val = std::numeric_limits<double>::infinity();
  int stale = 0;
  Checkpoint checkpoint;
  bool has_checkpoint = false;
};

Checkpoint snapshot(const ModelParams& params, const Vocabulary& vocab,
                    const TrainingConfig& cfg, int64_t step, bool coverage_on) {
  Checkpoint ck;
  ck.params = params;
  ck.meta.dims = params.dims;
  ck.meta.vocab_hash_hex = to_hex(vocab.hash());
  ck.meta.step = step;
  ck.meta.coverage_enabled = coverage_on;
  ck.meta.config_json = cfg.to_json();
  return ck;
}

}  // namespace

TrainResult train(const TrainingConfig& cfg, const ModelDims& dims,
                  const std::vector<EncodedExample>& train_set,
                  const std::vector<EncodedExample>& val_set,
                  const Vocabulary& vocab, const ModelParams* init_params,
                  int64_t initial_step, const std::string& checkpoint_path) {
  cfg.validate_fields();
  if (train_set.empty()) fail("train: empty training set");
  if (dims.vocab_size != vocab.size())
    fail("train: dims.vocab_size=", dims.vocab_size, " but vocabulary has ",
         vocab.size(), " entries");

  ModelParams params =
      init_params ? *init_params : ModelParams::init(dims, cfg.seed);
  params.validate();
  if (params.dims.d_emb != dims.d_emb || params.dims.d_hid != dims.d_hid ||
      params.dims.vocab_size != dims.vocab_size)
    fail("train: initial parameters disagree with requested dims");

  const auto names = ModelParams::names(dims);
  std::vector<ad::TensorF*> param_ptrs;
  std::vector<const ad::TensorF*> param_views;
  for (const auto& name : names) {
    param_ptrs.push_back(&params.at(name));
    param_views.push_back(&params.at(name));
  }

  ad::AdagradState opt;
  opt.learning_rate = cfg.learning_rate;
  opt.epsilon = cfg.adagrad_epsilon;
  opt.initial_accumulator = cfg.adagrad_initial_accumulator;
  opt.reset(param_views);

  const auto& eval_set = val_set.empty() ? train_set : val_set;
  auto coverage_on = [&](int step) {
    return cfg.coverage_phase_steps > 0 &&
           step > cfg.max_steps - cfg.coverage_phase_steps;
  };

  TrainResult res;
  BestTracker best;

  auto run_validation = [&](int step) {
    const bool cov = coverage_on(step);
    const double vl = validate(params, eval_set, cfg.lambda, cov, cfg.batch_size);
    CurvePoint pt;
    pt.step = step;
    pt.val_loss = vl;
    pt.has_val = true;
    if (!res.curve.empty() && res.curve.back().step == step) {
      res.curve.back().val_loss = vl;
      res.curve.back().has_val = true;
    } else {
      res.curve.push_back(pt);
    }
    if (vl < best.val) {
      best.val = vl;
      best.stale = 0;
      best.checkpoint = snapshot(params, vocab, cfg, initial_step + step, cov);
      best.has_checkpoint = true;
      if (!checkpoint_path.empty())
        save_checkpoint(best.checkpoint.params, best.checkpoint.meta, checkpoint_path);
    } else {
      ++best.stale;
    }
    return vl;
  };

  run_validation(0);

  Rng order_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<int> order(train_set.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  size_t cursor = order.size();  // forces a shuffle at the first step

  bool prev_cov = coverage_on(1);
  int step = 0;
  while (step < cfg.max_steps) {
    ++step;
    const bool cov = coverage_on(step);
    if (cov && !prev_cov) {
      // Entering the coverage phase changes the loss scale; restart the
      // improvement race so the returned checkpoint is a coverage one.
      best.val = std::numeric_limits<double>::infinity();
      best.stale = 0;
    }
    prev_cov = cov;

    std::vector<EncodedExample> chunk;
    for (int k = 0; k < cfg.batch_size; ++k) {
      if (cursor == order.size()) {
        order_rng.shuffle(order);
        cursor = 0;
      }
      chunk.push_back(train_set[static_cast<size_t>(order[cursor++])]);
      if (chunk.size() == train_set.size()) break;  // batch is capped by corpus
    }
    const Batch batch = make_batches(chunk, static_cast<int>(chunk.size()))[0];

    double loss_value = 0;
    bool bad_step = false;
    try {
      ad::GraphF g;
      auto pn = model::bind_params(g, params, /*trainable=*/true);
      ad::NodeId loss = model::sequence_loss(g, pn, batch, cfg.lambda, cov);
      loss_value = static_cast<double>(g.val(loss).v[0]);
      g.backward(loss);

      std::vector<ad::TensorF> grads;
      grads.reserve(names.size());
      for (const auto& name : names) grads.push_back(g.grad(pn.at(name)));
      std::vector<ad::TensorF*> grad_ptrs;
      std::vector<const ad::TensorF*> grad_views;
      for (auto& t : grads) {
        grad_ptrs.push_back(&t);
        grad_views.push_back(&t);
      }
      ad::clip_by_global_norm(grad_ptrs, cfg.clip_norm);
      ad::adagrad_step(param_ptrs, grad_views, opt);
    } catch (const PgnetError& e) {
      if (std::string(e.what()).find("non-finite") == std::string::npos) throw;
      bad_step = true;
    }
    if (!bad_step && !std::isfinite(loss_value)) bad_step = true;

    if (bad_step) {
      res.aborted_nonfinite = true;
      break;
    }

    CurvePoint pt;
    pt.step = step;
    pt.loss = loss_value;
    pt.has_loss = true;
    res.curve.push_back(pt);

    if (step % cfg.validate_every == 0 && step != cfg.max_steps)
      run_validation(step);
    if (best.stale >= cfg.patience) break;
  }
  res.steps_run = step;

  if (!res.aborted_nonfinite &&
      (res.curve.empty() || !res.curve.back().has_val ||
       res.curve.back().step != step))
    run_validation(step);

  if (!best.has_checkpoint) {
    best.checkpoint =
        snapshot(params, vocab, cfg, initial_step + step, coverage_on(step));
    best.has_checkpoint = true;
  }
  res.best = std::move(best.checkpoint);
  res.best_val_loss = best.val;
  return res;
}

TrainResult finetune(const Checkpoint& ck, const TrainingConfig& cfg,
                     const std::vector<EncodedExample>& train_set,
                     const std::vector<EncodedExample>& val_set,
                     const Vocabulary& vocab, const std::string& checkpoint_path) {
  if (ck.meta.vocab_hash_hex != to_hex(vocab.hash()))
    fail("finetune: vocabulary hash ", to_hex(vocab.hash()),
         " does not match checkpoint hash ", ck.meta.vocab_hash_hex,
         " (corpora must be encoded with the pretraining vocabulary)");
  TrainResult res = train(cfg, ck.meta.dims, train_set, val_set, vocab,
                          &ck.params, ck.meta.step, checkpoint_path);
  return res;
}

std::string curve_to_csv(const std::vector<CurvePoint>& curve) {
  std::string out = "step,loss,val_loss\n";
  for (const auto& pt : curve) {
    out += std::to_string(pt.step);
    out += ',';
    if (pt.has_loss) out += format_double(pt.loss);
    out += ',';
    if (pt.has_val) out += format_double(pt.val_loss);
    out += '\n';
  }
  return out;
}

}  // namespace pgnet
