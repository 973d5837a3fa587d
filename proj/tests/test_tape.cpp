#include "evnet/nn/grad_check.hpp"
#include "evnet/nn/tape.hpp"
#include "evnet/transforms.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace evnet::nn;

namespace {

using Build = std::function<Var(Tape&, const ParamStore&)>;

/// Scalar probe sum(out .* R) with a fixed random R, checked by central
/// differences over every parameter entry.
double check_op(const ParamStore& params, const Build& build, double step = 1e-6) {
  std::mt19937_64 rng(99);
  Matrix weights;
  auto loss_of = [&](Tape& t, const ParamStore& p) {
    Var out = build(t, p);
    if (weights.size() == 0) weights = oracle::random_matrix(out.rows(), out.cols(), rng);
    return sum(hadamard(out, t.constant(weights)));
  };
  Tape tape;
  Var loss = loss_of(tape, params);
  tape.backward(loss);
  const Gradients grads = tape.param_grads();
  return grad_check(
      [&](const ParamStore& p) {
        Tape t(false);
        return loss_of(t, p).value()(0, 0);
      },
      params, grads, {step, 0});
}

ParamStore store_of(std::initializer_list<std::pair<std::string, Matrix>> items) {
  ParamStore p;
  for (const auto& [name, m] : items) p.set(name, m);
  return p;
}

Matrix rnd(Eigen::Index r, Eigen::Index c, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  return oracle::random_matrix(r, c, rng, scale);
}

constexpr double kTol = 1e-4;

}  // namespace

TEST(GradCheck, QuadraticExample) {
  Eigen::VectorXd theta(2);
  theta << 1, 2;
  Eigen::VectorXd analytic(2);
  analytic << 2, 4;
  const double err = grad_check([](const Eigen::VectorXd& x) { return x.squaredNorm(); }, theta, analytic, 1e-4);
  EXPECT_LT(err, 1e-8);
  EXPECT_THROW(grad_check([](const Eigen::VectorXd& x) { return x.sum(); }, theta, analytic, 0.0),
               std::invalid_argument);
}

TEST(GradCheck, DetectsWrongGradient) {
  Eigen::VectorXd theta(2);
  theta << 1, 2;
  Eigen::VectorXd wrong(2);
  wrong << 2, 5;
  EXPECT_GT(grad_check([](const Eigen::VectorXd& x) { return x.squaredNorm(); }, theta, wrong, 1e-4), 0.05);
}

TEST(TapeOps, Elementwise) {
  const ParamStore p = store_of({{"a", rnd(3, 4, 1)}, {"b", rnd(3, 4, 2)}, {"r", rnd(1, 4, 3)}});
  EXPECT_LT(check_op(p, [](Tape& t, const ParamStore& s) { return add(t.param(s, "a"), t.param(s, "b")); }), kTol);
  EXPECT_LT(check_op(p, [](Tape& t, const ParamStore& s) { return sub(t.param(s, "a"), t.param(s, "b")); }), kTol);
  EXPECT_LT(check_op(p, [](Tape& t, const ParamStore& s) { return hadamard(t.param(s, "a"), t.param(s, "b")); }),
            kTol);
  EXPECT_LT(check_op(p, [](Tape& t, const ParamStore& s) { return scale(t.param(s, "a"), -2.5); }), kTol);
  EXPECT_LT(check_op(p, [](Tape& t, const ParamStore& s) { return add_row(t.param(s, "a"), t.param(s, "r")); }),
            kTol);
  EXPECT_LT(check_op(p, [](Tape& t, const ParamStore& s) { return relu(t.param(s, "a")); }), kTol);
  EXPECT_LT(check_op(p, [](Tape& t, const ParamStore& s) { return sum(t.param(s, "a")); }), kTol);
  EXPECT_LT(check_op(p, [](Tape& t, const ParamStore& s) { return mean(t.param(s, "a")); }), kTol);
}

TEST(TapeOps, Linear) {
  const ParamStore p = store_of({{"a", rnd(3, 4, 4)}, {"b", rnd(4, 5, 5)}});
  EXPECT_LT(check_op(p, [](Tape& t, const ParamStore& s) { return matmul(t.param(s, "a"), t.param(s, "b")); }),
            kTol);
  EXPECT_LT(check_op(p, [](Tape& t, const ParamStore& s) { return transpose(t.param(s, "a")); }), kTol);
  const Matrix w = rnd(6, 3, 6);
  EXPECT_LT(check_op(p, [&](Tape& t, const ParamStore& s) { return left_multiply(w, t.param(s, "a")); }), kTol);
}

TEST(TapeOps, Structural) {
  const ParamStore p = store_of({{"a", rnd(4, 6, 7)}, {"b", rnd(4, 2, 8)}, {"r", rnd(1, 6, 9)}});
  EXPECT_LT(check_op(p, [](Tape& t, const ParamStore& s) {
              return concat_cols({t.param(s, "a"), t.param(s, "b"), t.param(s, "a")});
            }),
            kTol);
  EXPECT_LT(check_op(p, [](Tape& t, const ParamStore& s) { return slice_rows(t.param(s, "a"), 1, 2); }), kTol);
  EXPECT_LT(check_op(p, [](Tape& t, const ParamStore& s) { return slice_cols(t.param(s, "a"), 2, 3); }), kTol);
  EXPECT_LT(check_op(p, [](Tape& t, const ParamStore& s) { return gather_rows(t.param(s, "a"), {3, 0, 3, 1}); }),
            kTol);
  EXPECT_LT(check_op(p, [](Tape& t, const ParamStore& s) { return flatten(t.param(s, "a")); }), kTol);
  EXPECT_LT(check_op(p, [](Tape& t, const ParamStore& s) { return reshape(t.param(s, "a"), 3, 8); }), kTol);
  EXPECT_LT(check_op(p, [](Tape& t, const ParamStore& s) { return tile_rows(t.param(s, "r"), 5); }), kTol);
}

TEST(TapeOps, FlattenIsRowMajor) {
  Tape t;
  Matrix m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  const Matrix f = flatten(t.constant(m)).value();
  for (int i = 0; i < 6; ++i) EXPECT_EQ(f(0, i), i + 1);
  const Matrix back = reshape(t.constant(f), 3, 2).value();
  EXPECT_EQ(back(0, 1), 2);
  EXPECT_EQ(back(1, 0), 3);
}

TEST(TapeOps, Nonlinear) {
  const ParamStore p = store_of({{"a", rnd(3, 5, 10)}, {"g", rnd(1, 5, 11)}, {"b", rnd(1, 5, 12)}});
  EXPECT_LT(check_op(p, [](Tape& t, const ParamStore& s) { return softmax_rows(t.param(s, "a")); }), kTol);
  EXPECT_LT(check_op(p, [](Tape& t, const ParamStore& s) {
              return layer_norm(t.param(s, "a"), t.param(s, "g"), t.param(s, "b"));
            }),
            kTol);
  EXPECT_LT(check_op(p, [](Tape& t, const ParamStore& s) { return row_norms(t.param(s, "a")); }), kTol);
}

TEST(TapeOps, SoftmaxRowsSumToOne) {
  Tape t;
  const Matrix s = softmax_rows(t.constant(rnd(6, 9, 13, 30.0))).value();
  for (Eigen::Index r = 0; r < s.rows(); ++r) EXPECT_NEAR(s.row(r).sum(), 1.0, 1e-12);
  EXPECT_GE(s.minCoeff(), 0.0);
}

TEST(TapeOps, LayerNormExamples) {
  Tape t;
  const Matrix gain = rnd(1, 4, 14), bias = rnd(1, 4, 15);
  const Matrix out = layer_norm(t.constant(Matrix::Constant(2, 4, 3.0)), t.constant(gain), t.constant(bias)).value();
  for (int r = 0; r < 2; ++r) EXPECT_LT((out.row(r) - bias).cwiseAbs().maxCoeff(), 1e-12);

  const Matrix x = rnd(5, 7, 16, 4.0);
  const Matrix y = layer_norm(t.constant(x), t.constant(Matrix::Ones(1, 7)), t.constant(Matrix::Zero(1, 7))).value();
  for (int r = 0; r < 5; ++r) {
    EXPECT_NEAR(y.row(r).mean(), 0.0, 1e-9);
    const double var = (x.row(r).array() - x.row(r).mean()).square().mean();
    EXPECT_NEAR(y(r, 0), (x(r, 0) - x.row(r).mean()) / std::sqrt(var + 1e-5), 1e-12);
  }
}

TEST(TapeOps, RowNormsZeroRowHasZeroGradient) {
  Tape t;
  Matrix m = rnd(3, 2, 17);
  m.row(1).setZero();
  Var v = t.variable(m);
  t.backward(sum(row_norms(v)));
  const Matrix g = t.grad(v);
  EXPECT_TRUE(g.allFinite());
  EXPECT_EQ(g.row(1).cwiseAbs().maxCoeff(), 0.0);
}

TEST(TapeOps, SpectralInverses) {
  std::mt19937_64 rng(18);
  Matrix spec(6, 4);
  spec.leftCols(2) = oracle::random_matrix(6, 2, rng).cwiseAbs();
  spec.rightCols(2) = oracle::random_matrix(6, 2, rng);
  const ParamStore p = store_of({{"s", spec}});
  EXPECT_LT(check_op(p, [](Tape& t, const ParamStore& s) { return idft_amp_phase(t.param(s, "s")); }), kTol);
  EXPECT_LT(check_op(p, [](Tape& t, const ParamStore& s) { return haar_inverse(t.param(s, "s")); }), kTol);

  Tape t;
  EXPECT_LT((idft_amp_phase(t.constant(spec)).value() - evnet::dft_inverse(spec)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((haar_inverse(t.constant(spec)).value() - evnet::haar_inverse(spec)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(TapeOps, BilinearPool) {
  const ParamStore p = store_of({{"a", rnd(3, 8, 19)}});
  EXPECT_LT(check_op(p, [](Tape& t, const ParamStore& s) { return bilinear_pool(t.param(s, "a")); }), kTol);

  // Direct evaluation: outer product, 2x2 max pooling, row-major flatten.
  const Matrix a = rnd(2, 6, 20);
  Tape t;
  const Matrix out = bilinear_pool(t.constant(a)).value();
  ASSERT_EQ(out.rows(), 2);
  ASSERT_EQ(out.cols(), 9);
  for (int r = 0; r < 2; ++r)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double best = -INFINITY;
        for (int di = 0; di < 2; ++di)
          for (int dj = 0; dj < 2; ++dj) best = std::max(best, a(r, 2 * i + di) * a(r, 2 * j + dj));
        EXPECT_DOUBLE_EQ(out(r, 3 * i + j), best);
      }
  // Sign flip leaves v^T v unchanged.
  EXPECT_EQ(bilinear_pool(t.constant(-a)).value(), out);
  EXPECT_THROW(bilinear_pool(t.constant(Matrix::Zero(2, 5))), std::invalid_argument);
}

TEST(Tape, SharedParamAccumulates) {
  ParamStore p;
  p.set("w", Matrix::Constant(1, 1, 3.0));
  Tape t;
  Var a = t.param(p, "w");
  Var b = t.param(p, "w");
  EXPECT_EQ(a.id(), b.id());
  t.backward(sum(hadamard(a, b)));  // w^2
  EXPECT_DOUBLE_EQ(t.param_grads().at("w")(0, 0), 6.0);
}

TEST(Tape, DetachAndConstantsStopGradients) {
  ParamStore p;
  p.set("w", rnd(2, 2, 21));
  Tape t;
  Var w = t.param(p, "w");
  t.backward(sum(add(detach(w), t.constant(Matrix::Ones(2, 2)))));
  EXPECT_EQ(t.param_grads().at("w").cwiseAbs().maxCoeff(), 0.0);
}

TEST(Tape, InferenceTapeHasNoGradients) {
  ParamStore p;
  p.set("w", rnd(2, 2, 22));
  Tape t(false);
  Var w = t.param(p, "w");
  EXPECT_FALSE(t.requires_grad(w));
  EXPECT_FALSE(t.requires_grad(matmul(w, w)));
}

TEST(Tape, Errors) {
  Tape t, other;
  EXPECT_THROW(matmul(t.constant(Matrix::Zero(2, 3)), t.constant(Matrix::Zero(2, 3))), std::invalid_argument);
  EXPECT_THROW(add(t.constant(Matrix::Zero(2, 3)), t.constant(Matrix::Zero(3, 2))), std::invalid_argument);
  EXPECT_THROW(add(t.constant(Matrix::Zero(1, 1)), other.constant(Matrix::Zero(1, 1))), std::invalid_argument);
  EXPECT_THROW(t.backward(t.variable(Matrix::Zero(2, 2))), std::invalid_argument);
  ParamStore p;
  EXPECT_THROW(p.get("missing"), std::out_of_range);
}
