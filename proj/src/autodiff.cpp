#include "citesum/autodiff.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

#include "citesum/errors.hpp"

namespace citesum::ad {

const Mat& Var::val() const { return tape->value(id); }
const Mat& Var::grad() const { return tape->gradient(id); }
int Var::rows() const { return static_cast<int>(val().rows()); }
int Var::cols() const { return static_cast<int>(val().cols()); }

Var Tape::push(Mat value, std::function<void(Tape&)> back) {
  Node n;
  n.grad = Mat::Zero(value.rows(), value.cols());
  n.val = std::move(value);
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::leaf(Mat value) { return push(std::move(value), {}); }

namespace {
void require(bool cond, const char* what) {
  if (!cond) throw ShapeMismatch(what);
}
}  // namespace

Var Tape::matmul(Var a, Var b) {
  require(a.cols() == b.rows(), "matmul: inner dimensions differ");
  Mat v = a.val() * b.val();
  Var out{this, static_cast<int>(nodes_.size())};
  int ia = a.id, ib = b.id, io = out.id;
  push(std::move(v), [ia, ib, io](Tape& t) {
    const Mat& g = t.nodes_[io].grad;
    t.nodes_[ia].grad.noalias() += g * t.nodes_[ib].val.transpose();
    t.nodes_[ib].grad.noalias() += t.nodes_[ia].val.transpose() * g;
  });
  return out;
}

Var Tape::matmul_bt(Var a, Var b) {
  require(a.cols() == b.cols(), "matmul_bt: inner dimensions differ");
  Mat v = a.val() * b.val().transpose();
  Var out{this, static_cast<int>(nodes_.size())};
  int ia = a.id, ib = b.id, io = out.id;
  push(std::move(v), [ia, ib, io](Tape& t) {
    const Mat& g = t.nodes_[io].grad;
    t.nodes_[ia].grad.noalias() += g * t.nodes_[ib].val;
    t.nodes_[ib].grad.noalias() += g.transpose() * t.nodes_[ia].val;
  });
  return out;
}

Var Tape::add(Var a, Var b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "add: shapes differ");
  Var out{this, static_cast<int>(nodes_.size())};
  int ia = a.id, ib = b.id, io = out.id;
  push(a.val() + b.val(), [ia, ib, io](Tape& t) {
    t.nodes_[ia].grad += t.nodes_[io].grad;
    t.nodes_[ib].grad += t.nodes_[io].grad;
  });
  return out;
}

Var Tape::sub(Var a, Var b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "sub: shapes differ");
  Var out{this, static_cast<int>(nodes_.size())};
  int ia = a.id, ib = b.id, io = out.id;
  push(a.val() - b.val(), [ia, ib, io](Tape& t) {
    t.nodes_[ia].grad += t.nodes_[io].grad;
    t.nodes_[ib].grad -= t.nodes_[io].grad;
  });
  return out;
}

Var Tape::add_rowvec(Var a, Var row) {
  require(row.rows() == 1 && row.cols() == a.cols(), "add_rowvec: row is not 1 x C");
  Mat v = a.val().rowwise() + row.val().row(0);
  Var out{this, static_cast<int>(nodes_.size())};
  int ia = a.id, ir = row.id, io = out.id;
  push(std::move(v), [ia, ir, io](Tape& t) {
    const Mat& g = t.nodes_[io].grad;
    t.nodes_[ia].grad += g;
    t.nodes_[ir].grad.row(0) += g.colwise().sum();
  });
  return out;
}

Var Tape::scale(Var a, double c) {
  Var out{this, static_cast<int>(nodes_.size())};
  int ia = a.id, io = out.id;
  push(a.val() * c, [ia, io, c](Tape& t) {
    t.nodes_[ia].grad += c * t.nodes_[io].grad;
  });
  return out;
}

Var Tape::transpose(Var a) {
  Var out{this, static_cast<int>(nodes_.size())};
  int ia = a.id, io = out.id;
  push(a.val().transpose(), [ia, io](Tape& t) {
    t.nodes_[ia].grad += t.nodes_[io].grad.transpose();
  });
  return out;
}

Var Tape::add_const(Var a, Mat constant) {
  require(constant.rows() == a.rows() && constant.cols() == a.cols(),
          "add_const: shapes differ");
  Var out{this, static_cast<int>(nodes_.size())};
  int ia = a.id, io = out.id;
  push(a.val() + constant, [ia, io](Tape& t) {
    t.nodes_[ia].grad += t.nodes_[io].grad;
  });
  return out;
}

Var Tape::slice_rows(Var a, int start, int n) {
  require(start >= 0 && n >= 0 && start + n <= a.rows(), "slice_rows: out of range");
  Var out{this, static_cast<int>(nodes_.size())};
  int ia = a.id, io = out.id;
  push(a.val().middleRows(start, n), [ia, io, start, n](Tape& t) {
    t.nodes_[ia].grad.middleRows(start, n) += t.nodes_[io].grad;
  });
  return out;
}

Var Tape::slice_cols(Var a, int start, int n) {
  require(start >= 0 && n >= 0 && start + n <= a.cols(), "slice_cols: out of range");
  Var out{this, static_cast<int>(nodes_.size())};
  int ia = a.id, io = out.id;
  push(a.val().middleCols(start, n), [ia, io, start, n](Tape& t) {
    t.nodes_[ia].grad.middleCols(start, n) += t.nodes_[io].grad;
  });
  return out;
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_rows: empty");
  int cols = parts[0].cols(), rows = 0;
  std::vector<int> ids, offsets, sizes;
  for (const Var& p : parts) {
    require(p.cols() == cols, "concat_rows: column mismatch");
    ids.push_back(p.id);
    offsets.push_back(rows);
    sizes.push_back(p.rows());
    rows += p.rows();
  }
  Mat v(rows, cols);
  for (std::size_t i = 0; i < parts.size(); ++i)
    v.middleRows(offsets[i], sizes[i]) = parts[i].val();
  Var out{this, static_cast<int>(nodes_.size())};
  int io = out.id;
  push(std::move(v), [ids, offsets, sizes, io](Tape& t) {
    const Mat& g = t.nodes_[io].grad;
    for (std::size_t i = 0; i < ids.size(); ++i)
      t.nodes_[ids[i]].grad += g.middleRows(offsets[i], sizes[i]);
  });
  return out;
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_cols: empty");
  int rows = parts[0].rows(), cols = 0;
  std::vector<int> ids, offsets, sizes;
  for (const Var& p : parts) {
    require(p.rows() == rows, "concat_cols: row mismatch");
    ids.push_back(p.id);
    offsets.push_back(cols);
    sizes.push_back(p.cols());
    cols += p.cols();
  }
  Mat v(rows, cols);
  for (std::size_t i = 0; i < parts.size(); ++i)
    v.middleCols(offsets[i], sizes[i]) = parts[i].val();
  Var out{this, static_cast<int>(nodes_.size())};
  int io = out.id;
  push(std::move(v), [ids, offsets, sizes, io](Tape& t) {
    const Mat& g = t.nodes_[io].grad;
    for (std::size_t i = 0; i < ids.size(); ++i)
      t.nodes_[ids[i]].grad += g.middleCols(offsets[i], sizes[i]);
  });
  return out;
}

Var Tape::softmax_rows(Var a) {
  Mat v(a.rows(), a.cols());
  for (int r = 0; r < a.rows(); ++r) {
    double mx = a.val().row(r).maxCoeff();
    Eigen::RowVectorXd e = (a.val().row(r).array() - mx).exp();
    v.row(r) = e / e.sum();
  }
  Var out{this, static_cast<int>(nodes_.size())};
  int ia = a.id, io = out.id;
  push(std::move(v), [ia, io](Tape& t) {
    const Mat& y = t.nodes_[io].val;
    const Mat& g = t.nodes_[io].grad;
    for (int r = 0; r < y.rows(); ++r) {
      double dot = y.row(r).dot(g.row(r));
      t.nodes_[ia].grad.row(r) +=
          (y.row(r).array() * (g.row(r).array() - dot)).matrix();
    }
  });
  return out;
}

namespace {
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;
}  // namespace

Var Tape::gelu(Var a) {
  Mat v = a.val().unaryExpr([](double x) {
    return 0.5 * x * (1.0 + std::tanh(kGeluC * (x + kGeluA * x * x * x)));
  });
  Var out{this, static_cast<int>(nodes_.size())};
  int ia = a.id, io = out.id;
  push(std::move(v), [ia, io](Tape& t) {
    const Mat& x = t.nodes_[ia].val;
    const Mat& g = t.nodes_[io].grad;
    Mat d = x.unaryExpr([](double xv) {
      double u = kGeluC * (xv + kGeluA * xv * xv * xv);
      double th = std::tanh(u);
      double du = kGeluC * (1.0 + 3.0 * kGeluA * xv * xv);
      return 0.5 * (1.0 + th) + 0.5 * xv * (1.0 - th * th) * du;
    });
    t.nodes_[ia].grad.array() += d.array() * g.array();
  });
  return out;
}

Var Tape::layer_norm(Var x, Var gain, Var bias) {
  require(gain.rows() == 1 && gain.cols() == x.cols(), "layer_norm: gain shape");
  require(bias.rows() == 1 && bias.cols() == x.cols(), "layer_norm: bias shape");
  constexpr double eps = 1e-5;
  const int R = x.rows(), C = x.cols();
  auto xhat = std::make_shared<Mat>(R, C);
  auto inv_sigma = std::make_shared<Eigen::VectorXd>(R);
  Mat v(R, C);
  for (int r = 0; r < R; ++r) {
    double mu = x.val().row(r).mean();
    double var = (x.val().row(r).array() - mu).square().mean();
    double is = 1.0 / std::sqrt(var + eps);
    (*inv_sigma)(r) = is;
    xhat->row(r) = (x.val().row(r).array() - mu) * is;
    v.row(r) = (xhat->row(r).array() * gain.val().row(0).array()) + bias.val().row(0).array();
  }
  Var out{this, static_cast<int>(nodes_.size())};
  int ix = x.id, ig = gain.id, ib = bias.id, io = out.id;
  push(std::move(v), [ix, ig, ib, io, xhat, inv_sigma](Tape& t) {
    const Mat& g = t.nodes_[io].grad;
    const Mat& gainv = t.nodes_[ig].val;
    for (int r = 0; r < g.rows(); ++r) {
      Eigen::RowVectorXd dy = g.row(r).array() * gainv.row(0).array();
      double m1 = dy.mean();
      double m2 = (dy.array() * xhat->row(r).array()).mean();
      t.nodes_[ix].grad.row(r) +=
          ((dy.array() - m1 - xhat->row(r).array() * m2) * (*inv_sigma)(r)).matrix();
      t.nodes_[ig].grad.row(0) += (g.row(r).array() * xhat->row(r).array()).matrix();
      t.nodes_[ib].grad.row(0) += g.row(r);
    }
  });
  return out;
}

Var Tape::embed(Var table, const std::vector<int>& ids) {
  const int V = table.rows(), M = table.cols();
  Mat v(static_cast<int>(ids.size()), M);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    require(ids[i] >= 0 && ids[i] < V, "embed: id out of range");
    v.row(static_cast<int>(i)) = table.val().row(ids[i]);
  }
  Var out{this, static_cast<int>(nodes_.size())};
  int it = table.id, io = out.id;
  push(std::move(v), [it, io, ids](Tape& t) {
    const Mat& g = t.nodes_[io].grad;
    for (std::size_t i = 0; i < ids.size(); ++i)
      t.nodes_[it].grad.row(ids[i]) += g.row(static_cast<int>(i));
  });
  return out;
}

Var Tape::weighted_sum(const std::vector<Var>& mats, Var weights) {
  require(!mats.empty(), "weighted_sum: empty");
  require(weights.cols() == 1 && weights.rows() == static_cast<int>(mats.size()),
          "weighted_sum: weights must be n x 1");
  const int R = mats[0].rows(), C = mats[0].cols();
  std::vector<int> ids;
  Mat v = Mat::Zero(R, C);
  for (std::size_t j = 0; j < mats.size(); ++j) {
    require(mats[j].rows() == R && mats[j].cols() == C, "weighted_sum: shape mismatch");
    ids.push_back(mats[j].id);
    v += weights.val()(static_cast<int>(j), 0) * mats[j].val();
  }
  Var out{this, static_cast<int>(nodes_.size())};
  int iw = weights.id, io = out.id;
  push(std::move(v), [ids, iw, io](Tape& t) {
    const Mat& g = t.nodes_[io].grad;
    for (std::size_t j = 0; j < ids.size(); ++j) {
      double w = t.nodes_[iw].val(static_cast<int>(j), 0);
      t.nodes_[ids[j]].grad += w * g;
      t.nodes_[iw].grad(static_cast<int>(j), 0) +=
          (g.array() * t.nodes_[ids[j]].val.array()).sum();
    }
  });
  return out;
}

Var Tape::cross_entropy_sum(Var logits, const std::vector<int>& targets,
                            const std::vector<unsigned char>& mask,
                            double inv_normalizer) {
  require(targets.size() == mask.size(), "cross_entropy: targets/mask length differ");
  require(static_cast<int>(targets.size()) == logits.rows(),
          "cross_entropy: one target per logit row");
  const int T = logits.rows(), V = logits.cols();
  auto probs = std::make_shared<Mat>(T, V);
  double total = 0.0;
  for (int t = 0; t < T; ++t) {
    double mx = logits.val().row(t).maxCoeff();
    Eigen::RowVectorXd e = (logits.val().row(t).array() - mx).exp();
    double z = e.sum();
    probs->row(t) = e / z;
    if (mask[t]) {
      require(targets[t] >= 0 && targets[t] < V, "cross_entropy: target out of range");
      total += (mx + std::log(z)) - logits.val()(t, targets[t]);
    }
  }
  Mat v(1, 1);
  v(0, 0) = total * inv_normalizer;
  Var out{this, static_cast<int>(nodes_.size())};
  int il = logits.id, io = out.id;
  push(std::move(v), [il, io, targets, mask, inv_normalizer, probs](Tape& t) {
    double gs = t.nodes_[io].grad(0, 0) * inv_normalizer;
    Mat& gl = t.nodes_[il].grad;
    for (std::size_t r = 0; r < targets.size(); ++r) {
      if (!mask[r]) continue;
      int ri = static_cast<int>(r);
      gl.row(ri) += gs * probs->row(ri);
      gl(ri, targets[r]) -= gs;
    }
  });
  return out;
}

void Tape::backward(Var root) {
  if (root.tape != this) throw std::invalid_argument("backward: foreign var");
  if (root.rows() != 1 || root.cols() != 1)
    throw ShapeMismatch("backward: root must be a 1x1 scalar");
  for (auto& n : nodes_) n.grad.setZero();
  nodes_[root.id].grad(0, 0) = 1.0;
  for (int i = root.id; i >= 0; --i) {
    if (nodes_[i].back) nodes_[i].back(*this);
  }
}

}  // namespace citesum::ad
