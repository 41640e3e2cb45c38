// Central finite differences over every parameter element, compared against
// the tape gradients of batch_loss.
#pragma once

#include <string>
#include <vector>

#include "citesum/model.hpp"

namespace grad_check {

struct Result {
  double max_rel = 0;
  std::string worst_tensor;
  long elements = 0;
};

// rel = |analytic - fd| / max(|analytic|, |fd|, floor); the floor keeps
// finite-difference noise on near-zero gradients from dominating the ratio.
inline Result run(citesum::ModelParams& params,
                  const std::vector<citesum::TrainingInstance>& batch,
                  double h = 1e-5, double floor = 1e-4) {
  using citesum::Tape;
  using citesum::Var;

  Tape tape;
  citesum::ParamVars pv = citesum::bind_params(tape, params);
  Var loss = citesum::batch_loss(tape, pv, batch, params.config);
  tape.backward(loss);
  std::vector<citesum::Mat> analytic;
  for (Var v : pv.ordered) analytic.push_back(v.grad());

  Result res;
  auto tensors = params.tensors();
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    citesum::Mat& m = *tensors[i].second;
    for (int r = 0; r < m.rows(); ++r) {
      for (int c = 0; c < m.cols(); ++c) {
        const double keep = m(r, c);
        m(r, c) = keep + h;
        const double up = citesum::loss_value(params, batch);
        m(r, c) = keep - h;
        const double down = citesum::loss_value(params, batch);
        m(r, c) = keep;
        const double fd = (up - down) / (2 * h);
        const double a = analytic[i](r, c);
        const double rel =
            std::abs(a - fd) / std::max({floor, std::abs(a), std::abs(fd)});
        ++res.elements;
        if (rel > res.max_rel) {
          res.max_rel = rel;
          res.worst_tensor = tensors[i].first;
        }
      }
    }
  }
  return res;
}

}  // namespace grad_check
