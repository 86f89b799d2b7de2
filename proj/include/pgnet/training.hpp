#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pgnet/checkpoint.hpp"
#include "pgnet/corpus.hpp"
#include "pgnet/vocab.hpp"

namespace pgnet {

struct TrainingConfig {
  float learning_rate = 0.15f;
  int batch_size = 16;
  int max_steps = 1000;
  // Coverage is enabled for this many final steps of the run.
  int coverage_phase_steps = 3000;
  double lambda = 1.0;
  double clip_norm = 2.0;
  int validate_every = 100;
  int patience = 5;  // validations without improvement before stopping
  uint64_t seed = 0;
  float adagrad_epsilon = 1e-10f;
  float adagrad_initial_accumulator = 0.1f;
  int max_article_len = 400;
  int max_summary_len = 100;

  void validate_fields() const;
  std::string to_json() const;
};

struct CurvePoint {
  int step = 0;  // 0 is the pre-training validation row
  double loss = 0;
  bool has_loss = false;
  double val_loss = 0;
  bool has_val = false;
};

struct TrainResult {
  Checkpoint best;
  std::vector<CurvePoint> curve;
  double best_val_loss = 0;
  int steps_run = 0;
  bool aborted_nonfinite = false;
};

std::vector<EncodedExample> encode_corpus(const std::vector<RawExample>& raw,
                                          const Vocabulary& vocab,
                                          int max_article_len, int max_summary_len);

// Adagrad training with gradient clipping, seeded batch shuffling per epoch,
// validation-driven early stopping, and a coverage phase over the final
// coverage_phase_steps. Fully determined by (config, dims, data, init).
// When checkpoint_path is set, the best checkpoint is also written there on
// every validation improvement. On a non-finite training loss the run stops
// and the last good checkpoint is kept.
TrainResult train(const TrainingConfig& cfg, const ModelDims& dims,
                  const std::vector<EncodedExample>& train_set,
                  const std::vector<EncodedExample>& val_set,
                  const Vocabulary& vocab,
                  const ModelParams* init_params = nullptr,
                  int64_t initial_step = 0,
                  const std::string& checkpoint_path = "");

// Same loop initialized from a checkpoint; Adagrad accumulators restart.
// The corpus must be encoded with the checkpoint's vocabulary (hash-checked).
TrainResult finetune(const Checkpoint& ck, const TrainingConfig& cfg,
                     const std::vector<EncodedExample>& train_set,
                     const std::vector<EncodedExample>& val_set,
                     const Vocabulary& vocab,
                     const std::string& checkpoint_path = "");

// Teacher-forced mean per-example loss; parameters are never mutated.
double validate(const ModelParams& params,
                const std::vector<EncodedExample>& val_set, double lambda,
                bool use_coverage, int batch_size);

std::string curve_to_csv(const std::vector<CurvePoint>& curve);

}  // namespace pgnet
