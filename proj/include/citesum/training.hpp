#pragma once

#include <cstdint>
#include <vector>

#include "citesum/model.hpp"

namespace citesum {

struct Hyper {
  double lr = 1e-4;
  int batch_size = 16;
  int epochs = 10;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int max_steps = 0;       // 0 = run all epochs
  int eval_every = 10;     // validation cadence in steps
  std::uint64_t shuffle_seed = 0;
};

class AdamOptimizer {
 public:
  AdamOptimizer(ModelParams& params, const Hyper& hyper);

  // grads aligned with params.tensors() order
  void step(const std::vector<Mat>& grads);
  int steps_taken() const { return t_; }

 private:
  ModelParams& params_;
  Hyper hyper_;
  std::vector<Mat> m_, v_;
  int t_ = 0;
};

struct TrainLogEntry {
  int step = 0;
  double loss = 0;
  double val_ppl = 0;  // NaN when this step had no validation pass
};

struct TrainResult {
  ModelParams best;       // lowest validation perplexity (ties keep the earliest)
  ModelParams last;
  std::vector<TrainLogEntry> log;
  double best_val_ppl = 0;
  int best_step = 0;
  int steps_run = 0;
};

// Deterministic epoch shuffling, fixed accumulation order, exact gradients
// through the tape. Throws Divergence (with the step index) when the loss
// stops being finite.
TrainResult train(const std::vector<TrainingInstance>& train_set,
                  const std::vector<TrainingInstance>& val_set,
                  const ModelConfig& cfg, const Hyper& hyper);

// exp of the token-weighted mean teacher-forced NLL.
double teacher_forced_perplexity(const ModelParams& params,
                                 const std::vector<TrainingInstance>& instances);

}  // namespace citesum
