#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace citesum::ad {

using Mat = Eigen::MatrixXd;

class Tape;

// Handle into a tape; cheap to copy.
struct Var {
  Tape* tape = nullptr;
  int id = -1;

  const Mat& val() const;
  const Mat& grad() const;
  int rows() const;
  int cols() const;
};

// Reverse-mode tape over double matrices. Nodes are appended during the
// forward pass; backward() walks them in reverse. All shapes are checked at
// op-construction time so a graph that builds is a graph that differentiates.
class Tape {
 public:
  Var leaf(Mat value);

  Var matmul(Var a, Var b);     // a * b
  Var matmul_bt(Var a, Var b);  // a * b^T
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var add_rowvec(Var a, Var row);  // row broadcast over all rows of a
  Var scale(Var a, double c);
  Var transpose(Var a);
  Var add_const(Var a, Mat constant);  // additive mask, no gradient to the mask
  Var slice_rows(Var a, int start, int n);
  Var slice_cols(Var a, int start, int n);
  Var concat_rows(const std::vector<Var>& parts);
  Var concat_cols(const std::vector<Var>& parts);
  Var softmax_rows(Var a);
  Var gelu(Var a);
  Var layer_norm(Var x, Var gain, Var bias);  // gain/bias are 1 x C
  Var embed(Var table, const std::vector<int>& ids);
  // sum_j weights(j,0) * mats[j]; all mats share one shape, weights is n x 1
  Var weighted_sum(const std::vector<Var>& mats, Var weights);
  // scalar: inv_normalizer * sum_t mask[t] * (logsumexp(logits[t]) - logits[t][targets[t]])
  Var cross_entropy_sum(Var logits, const std::vector<int>& targets,
                        const std::vector<unsigned char>& mask, double inv_normalizer);

  // Seeds d(root)/d(root) = 1 (root must be 1x1) and accumulates grads.
  void backward(Var root);

  const Mat& value(int id) const { return nodes_[id].val; }
  const Mat& gradient(int id) const { return nodes_[id].grad; }
  std::size_t size() const { return nodes_.size(); }

 private:
  friend struct Var;
  struct Node {
    Mat val;
    Mat grad;
    std::function<void(Tape&)> back;  // empty for leaves
  };

  Var push(Mat value, std::function<void(Tape&)> back);
  Mat& grad_ref(int id) { return nodes_[id].grad; }

  std::vector<Node> nodes_;
};

// Large negative additive-mask value; exp underflows to exactly 0 after the
// max subtraction inside softmax.
inline constexpr double kMaskedLogit = -1e30;

}  // namespace citesum::ad
