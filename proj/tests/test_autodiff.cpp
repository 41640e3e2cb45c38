#include <doctest.h>

#include <functional>
#include <random>

#include "citesum/autodiff.hpp"
#include "citesum/errors.hpp"

using namespace citesum;
using ad::Mat;
using ad::Tape;
using ad::Var;

namespace {

Mat random_mat(std::mt19937_64& rng, int r, int c, double scale = 1.0) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  Mat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = dist(rng);
  return m;
}

using Builder = std::function<Var(Tape&, std::vector<Var>&)>;

double eval_scalar(const std::vector<Mat>& inputs, const Builder& build) {
  Tape tape;
  std::vector<Var> vars;
  for (const auto& m : inputs) vars.push_back(tape.leaf(m));
  return build(tape, vars).val()(0, 0);
}

// central differences against the tape gradients, every element of every input
void check_fd(std::vector<Mat> inputs, const Builder& build, double h = 1e-6,
              double tol = 1e-5) {
  Tape tape;
  std::vector<Var> vars;
  for (const auto& m : inputs) vars.push_back(tape.leaf(m));
  Var loss = build(tape, vars);
  tape.backward(loss);
  std::vector<Mat> analytic;
  for (Var v : vars) analytic.push_back(v.grad());

  for (std::size_t i = 0; i < inputs.size(); ++i) {
    for (int r = 0; r < inputs[i].rows(); ++r) {
      for (int c = 0; c < inputs[i].cols(); ++c) {
        const double keep = inputs[i](r, c);
        inputs[i](r, c) = keep + h;
        const double up = eval_scalar(inputs, build);
        inputs[i](r, c) = keep - h;
        const double down = eval_scalar(inputs, build);
        inputs[i](r, c) = keep;
        const double fd = (up - down) / (2 * h);
        const double a = analytic[i](r, c);
        const double rel = std::abs(a - fd) / std::max({1e-8, std::abs(a), std::abs(fd)});
        INFO("input ", i, " at (", r, ",", c, "): analytic ", a, " fd ", fd);
        CHECK(rel < tol);
      }
    }
  }
}

// u^T X v squeezes a matrix to a scalar with a non-uniform but FIXED gradient;
// the weights must be frozen outside the builder or finite differences see a
// different function on every call
struct Squeeze {
  Mat u, v;

  Squeeze(std::mt19937_64& rng, int rows, int cols)
      : u(random_mat(rng, rows, 1)), v(random_mat(rng, cols, 1)) {}

  Var operator()(Tape& t, Var x) const {
    return t.matmul(t.matmul(t.transpose(t.leaf(u)), x), t.leaf(v));
  }
};

}  // namespace

TEST_CASE("fd: matmul and matmul_bt") {
  std::mt19937_64 rng(1);
  const Squeeze sq(rng, 3, 2);
  check_fd({random_mat(rng, 3, 4), random_mat(rng, 4, 2)},
           [sq](Tape& t, std::vector<Var>& v) { return sq(t, t.matmul(v[0], v[1])); });
  check_fd({random_mat(rng, 3, 4), random_mat(rng, 2, 4)},
           [sq](Tape& t, std::vector<Var>& v) { return sq(t, t.matmul_bt(v[0], v[1])); });
}

TEST_CASE("fd: add, sub, scale, transpose, add_rowvec, add_const") {
  std::mt19937_64 rng(2);
  const Squeeze sq(rng, 3, 3);
  check_fd({random_mat(rng, 3, 3), random_mat(rng, 3, 3), random_mat(rng, 1, 3)},
           [sq](Tape& t, std::vector<Var>& v) {
             Var x = t.add_rowvec(t.sub(t.add(v[0], v[1]), v[1]), v[2]);
             x = t.scale(t.transpose(x), 1.7);
             x = t.add_const(x, Mat::Ones(x.rows(), x.cols()));
             return sq(t, x);
           });
}

TEST_CASE("fd: slicing and concatenation") {
  std::mt19937_64 rng(3);
  const Squeeze sq(rng, 4, 6);
  check_fd({random_mat(rng, 4, 6)}, [sq](Tape& t, std::vector<Var>& v) {
    Var left = t.slice_cols(v[0], 0, 3);
    Var right = t.slice_cols(v[0], 3, 3);
    Var back = t.concat_cols({right, left});
    Var top = t.slice_rows(back, 0, 2);
    Var bottom = t.slice_rows(back, 2, 2);
    return sq(t, t.concat_rows({bottom, top}));
  });
}

TEST_CASE("fd: softmax_rows") {
  std::mt19937_64 rng(4);
  const Squeeze sq(rng, 3, 5);
  check_fd({random_mat(rng, 3, 5, 2.0)}, [sq](Tape& t, std::vector<Var>& v) {
    return sq(t, t.softmax_rows(v[0]));
  });
}

TEST_CASE("softmax_rows: masked entries get exactly zero") {
  Tape t;
  Mat logits(1, 4);
  logits << 0.3, ad::kMaskedLogit, -0.7, ad::kMaskedLogit;
  Var p = t.softmax_rows(t.leaf(logits));
  CHECK(p.val()(0, 1) == 0.0);
  CHECK(p.val()(0, 3) == 0.0);
  CHECK(p.val().row(0).sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("fd: gelu") {
  std::mt19937_64 rng(5);
  const Squeeze sq(rng, 3, 4);
  check_fd({random_mat(rng, 3, 4, 2.0)},
           [sq](Tape& t, std::vector<Var>& v) { return sq(t, t.gelu(v[0])); });
}

TEST_CASE("fd: layer_norm") {
  std::mt19937_64 rng(6);
  const Squeeze sq(rng, 3, 6);
  check_fd({random_mat(rng, 3, 6), random_mat(rng, 1, 6), random_mat(rng, 1, 6)},
           [sq](Tape& t, std::vector<Var>& v) {
             return sq(t, t.layer_norm(v[0], v[1], v[2]));
           });
}

TEST_CASE("fd: embed") {
  std::mt19937_64 rng(7);
  const std::vector<int> ids = {2, 0, 2, 3};  // repeated row accumulates
  const Squeeze sq(rng, 4, 4);
  check_fd({random_mat(rng, 5, 4)}, [sq, ids](Tape& t, std::vector<Var>& v) {
    return sq(t, t.embed(v[0], ids));
  });
}

TEST_CASE("fd: weighted_sum") {
  std::mt19937_64 rng(8);
  const Squeeze sq(rng, 3, 4);
  check_fd({random_mat(rng, 3, 4), random_mat(rng, 3, 4), random_mat(rng, 2, 1)},
           [sq](Tape& t, std::vector<Var>& v) {
             return sq(t, t.weighted_sum({v[0], v[1]}, v[2]));
           });
}

TEST_CASE("fd: cross_entropy_sum") {
  std::mt19937_64 rng(9);
  const std::vector<int> targets = {1, 3, 0};
  const std::vector<unsigned char> mask = {1, 0, 1};
  check_fd({random_mat(rng, 3, 5, 2.0)}, [targets, mask](Tape& t, std::vector<Var>& v) {
    return t.cross_entropy_sum(v[0], targets, mask, 0.5);
  });
}

TEST_CASE("fd: composed attention-style block") {
  std::mt19937_64 rng(10);
  const Squeeze sq(rng, 4, 6);
  check_fd(
      {random_mat(rng, 4, 6), random_mat(rng, 6, 6, 0.5), random_mat(rng, 6, 6, 0.5),
       random_mat(rng, 6, 6, 0.5), random_mat(rng, 1, 6), random_mat(rng, 1, 6)},
      [sq](Tape& t, std::vector<Var>& v) {
        Var xn = t.layer_norm(v[0], v[4], v[5]);
        Var q = t.matmul(xn, v[1]);
        Var k = t.matmul(xn, v[2]);
        Var val = t.matmul(xn, v[3]);
        Var scores = t.scale(t.matmul_bt(q, k), 1.0 / std::sqrt(6.0));
        Var attn = t.softmax_rows(scores);
        Var out = t.add(v[0], t.matmul(attn, val));
        return sq(t, t.gelu(out));
      },
      1e-6, 5e-5);
}

TEST_CASE("backward requires a scalar root") {
  Tape t;
  Var x = t.leaf(Mat::Ones(2, 2));
  CHECK_THROWS_AS(t.backward(x), ShapeMismatch);
}

TEST_CASE("shape errors") {
  Tape t;
  Var a = t.leaf(Mat::Ones(2, 3));
  Var b = t.leaf(Mat::Ones(2, 3));
  CHECK_THROWS_AS(t.matmul(a, b), ShapeMismatch);
  CHECK_THROWS_AS(t.slice_rows(a, 1, 5), ShapeMismatch);
  CHECK_THROWS_AS(t.embed(a, {7}), ShapeMismatch);
}
