#include "citesum/training.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "citesum/errors.hpp"
#include "citesum/util.hpp"

namespace citesum {

AdamOptimizer::AdamOptimizer(ModelParams& params, const Hyper& hyper)
    : params_(params), hyper_(hyper) {
  for (const auto& [name, mat] : params_.tensors()) {
    m_.emplace_back(Mat::Zero(mat->rows(), mat->cols()));
    v_.emplace_back(Mat::Zero(mat->rows(), mat->cols()));
  }
}

void AdamOptimizer::step(const std::vector<Mat>& grads) {
  auto tensors = params_.tensors();
  if (grads.size() != tensors.size())
    throw ShapeMismatch("gradient count does not match parameter tensors");
  ++t_;
  const double bc1 = 1.0 - std::pow(hyper_.beta1, t_);
  const double bc2 = 1.0 - std::pow(hyper_.beta2, t_);
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    Mat& p = *tensors[i].second;
    const Mat& g = grads[i];
    m_[i] = hyper_.beta1 * m_[i] + (1.0 - hyper_.beta1) * g;
    v_[i] = hyper_.beta2 * v_[i] + (1.0 - hyper_.beta2) * g.cwiseProduct(g);
    const Mat mhat = m_[i] / bc1;
    const Mat vhat = v_[i] / bc2;
    p.array() -= hyper_.lr * mhat.array() / (vhat.array().sqrt() + hyper_.adam_eps);
  }
}

namespace {

std::vector<Mat> compute_gradients(ModelParams& params,
                                   const std::vector<TrainingInstance>& batch,
                                   double* loss_out) {
  Tape tape;
  ParamVars pv = bind_params(tape, params);
  Var loss = batch_loss(tape, pv, batch, params.config);
  *loss_out = loss.val()(0, 0);
  tape.backward(loss);
  std::vector<Mat> grads;
  grads.reserve(pv.ordered.size());
  for (Var v : pv.ordered) grads.push_back(v.grad());
  return grads;
}

}  // namespace

TrainResult train(const std::vector<TrainingInstance>& train_set,
                  const std::vector<TrainingInstance>& val_set,
                  const ModelConfig& cfg, const Hyper& hyper) {
  if (train_set.empty()) throw std::invalid_argument("training set is empty");
  if (hyper.batch_size < 1 || hyper.epochs < 0 || hyper.lr < 0)
    throw std::invalid_argument("bad hyperparameters");

  TrainResult result;
  ModelParams params = ModelParams::init(cfg);
  AdamOptimizer adam(params, hyper);
  std::mt19937_64 shuffle_rng(hyper.shuffle_seed);

  result.best_val_ppl = std::numeric_limits<double>::infinity();
  const bool have_val = !val_set.empty();

  auto run_validation = [&](int step) {
    if (!have_val) return std::numeric_limits<double>::quiet_NaN();
    const double ppl = teacher_forced_perplexity(params, val_set);
    if (ppl < result.best_val_ppl) {
      result.best_val_ppl = ppl;
      result.best = params;
      result.best_step = step;
    }
    return ppl;
  };

  int step = 0;
  bool stop = false;
  for (int epoch = 0; epoch < hyper.epochs && !stop; ++epoch) {
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);
    deterministic_shuffle(order, shuffle_rng);

    for (std::size_t off = 0; off < order.size() && !stop;
         off += static_cast<std::size_t>(hyper.batch_size)) {
      std::vector<TrainingInstance> batch;
      for (std::size_t i = off;
           i < std::min(order.size(), off + static_cast<std::size_t>(hyper.batch_size)); ++i)
        batch.push_back(train_set[order[i]]);

      double loss = 0.0;
      std::vector<Mat> grads = compute_gradients(params, batch, &loss);
      if (!std::isfinite(loss))
        throw Divergence("non-finite loss at step " + std::to_string(step + 1));
      adam.step(grads);
      ++step;

      TrainLogEntry entry;
      entry.step = step;
      entry.loss = loss;
      entry.val_ppl = std::numeric_limits<double>::quiet_NaN();
      const bool last_step =
          (hyper.max_steps > 0 && step >= hyper.max_steps) ||
          (epoch + 1 == hyper.epochs && off + static_cast<std::size_t>(hyper.batch_size) >=
                                             order.size());
      if (hyper.eval_every > 0 && (step % hyper.eval_every == 0 || last_step))
        entry.val_ppl = run_validation(step);
      result.log.push_back(entry);

      if (hyper.max_steps > 0 && step >= hyper.max_steps) stop = true;
    }
  }

  if (have_val && !std::isfinite(result.best_val_ppl)) run_validation(step);
  if (!have_val) {
    result.best = params;
    result.best_step = step;
    result.best_val_ppl = std::numeric_limits<double>::quiet_NaN();
  }
  result.last = std::move(params);
  result.steps_run = step;
  return result;
}

double teacher_forced_perplexity(const ModelParams& params,
                                 const std::vector<TrainingInstance>& instances) {
  if (instances.empty()) throw std::invalid_argument("no instances");
  // batch_loss is already the token-weighted mean NLL, so a single batch is
  // exactly exp(loss); multiple batches reduce with token weights
  long total_tokens = 0;
  for (const auto& inst : instances) total_tokens += count_target_tokens(inst);
  if (total_tokens == 0) throw std::invalid_argument("no unmasked target tokens");
  double weighted_nll = 0.0;
  constexpr std::size_t kEvalBatch = 16;
  for (std::size_t off = 0; off < instances.size(); off += kEvalBatch) {
    std::vector<TrainingInstance> batch(
        instances.begin() + off,
        instances.begin() + std::min(instances.size(), off + kEvalBatch));
    long batch_tokens = 0;
    for (const auto& inst : batch) batch_tokens += count_target_tokens(inst);
    weighted_nll += loss_value(params, batch) * static_cast<double>(batch_tokens);
  }
  return std::exp(weighted_nll / static_cast<double>(total_tokens));
}

}  // namespace citesum
