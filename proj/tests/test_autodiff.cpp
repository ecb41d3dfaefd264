#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <memory>
#include <random>

#include "consrec/autodiff.hpp"

using consrec::Matrix;
using consrec::Segments;
using consrec::SparseMatrix;
using consrec::Tape;
using consrec::Var;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Matrix m(r, c);
  for (auto& v : m.data()) v = u(rng);
  return m;
}

// Builds a scalar from parameters on a fresh tape each call.
using Builder = std::function<Var(Tape&, const std::vector<Var>&)>;

double fd_error(const Builder& build, const std::vector<Matrix>& params) {
  auto value = [&](const std::vector<Matrix>& ps) {
    Tape t;
    std::vector<Var> vs;
    for (const auto& p : ps) vs.push_back(t.parameter(p));
    return t.value(build(t, vs))(0, 0);
  };
  auto grad = [&](const std::vector<Matrix>& ps) {
    Tape t;
    std::vector<Var> vs;
    for (const auto& p : ps) vs.push_back(t.parameter(p));
    return t.backward(build(t, vs));
  };
  return consrec::finite_diff_check(value, grad, params, 1e-5);
}

}  // namespace

TEST(Tape, SigmoidOfZeroIsHalf) {
  Tape t;
  EXPECT_DOUBLE_EQ(t.value(t.sigmoid(t.constant(Matrix(1, 1, 0.0))))(0, 0), 0.5);
}

TEST(Tape, HadamardWithOnesIsIdentity) {
  std::mt19937_64 rng(1);
  Tape t;
  const Matrix a = random_matrix(3, 4, rng);
  EXPECT_EQ(t.value(t.hadamard(t.constant(a), t.constant(Matrix(3, 4, 1.0)))), a);
}

TEST(Tape, SegmentMeanPoolsRows) {
  Tape t;
  const Var b = t.constant(Matrix::from_rows({{1, 2}, {3, 4}, {5, 6}}));
  auto seg = std::make_shared<const Segments>(Segments::from_lists(3, {{0, 1}, {2}, {}}));
  const Matrix out = t.value(t.segment_mean(seg, b));
  EXPECT_EQ(out, Matrix::from_rows({{2, 3}, {5, 6}, {0, 0}}));
}

TEST(Tape, GradientOfSquare) {
  Tape t;
  const Var x = t.parameter(Matrix(1, 1, 3.0));
  const auto g = t.backward(t.sum(t.hadamard(x, x)));
  EXPECT_DOUBLE_EQ(g[0](0, 0), 6.0);
}

TEST(Tape, GradientOfLnSigmoidAtZero) {
  Tape t;
  const Var w = t.parameter(Matrix(1, 1, 0.0));
  EXPECT_DOUBLE_EQ(t.backward(t.ln_sigmoid(w))[0](0, 0), 0.5);
}

TEST(Tape, LnSigmoidIsStableForLargeInputs) {
  Tape t;
  const Matrix v = t.value(t.ln_sigmoid(t.constant(Matrix::from_rows({{-800.0, 800.0}}))));
  EXPECT_DOUBLE_EQ(v(0, 0), -800.0);
  EXPECT_DOUBLE_EQ(v(0, 1), 0.0);
}

TEST(Tape, UnusedParameterGetsZeroGradient) {
  Tape t;
  const Var x = t.parameter(Matrix(2, 2, 1.0));
  const Var unused = t.parameter(Matrix(3, 1, 1.0));
  const auto g = t.backward(t.sum(x));
  EXPECT_EQ(g[1], Matrix(3, 1));
  (void)unused;
}

TEST(Tape, RandomExpressionMatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  const std::vector<Matrix> params = {random_matrix(1, 1, rng), random_matrix(1, 1, rng), random_matrix(1, 1, rng),
                                      random_matrix(1, 1, rng), random_matrix(1, 1, rng)};
  const Builder f = [](Tape& t, const std::vector<Var>& p) {
    const Var a = t.sigmoid(t.hadamard(p[0], p[1]));
    const Var b = t.ln_sigmoid(t.subtract(p[2], t.scale(p[3], 0.7)));
    const Var c = t.mean_over({t.hadamard(a, b), p[4], t.hadamard(p[4], p[0])});
    return t.sum(t.add(c, t.hadamard(b, b)));
  };
  EXPECT_LT(fd_error(f, params), 1e-4);
}

// One randomized finite-difference check per registered op.
TEST(Tape, EveryOpMatchesFiniteDifferences) {
  std::mt19937_64 rng(11);
  auto sparse = std::make_shared<const SparseMatrix>(SparseMatrix::from_triplets(
      3, 4, {{0, 1, 0.5}, {0, 3, -1.5}, {1, 0, 2.0}, {2, 2, 0.25}, {2, 3, 1.0}}));
  auto seg = std::make_shared<const Segments>(Segments::from_lists(4, {{0, 2}, {}, {1, 2, 3}}));
  const Matrix w = random_matrix(3, 2, rng);
  const Matrix w5 = random_matrix(5, 1, rng);
  const std::vector<std::pair<const char*, std::pair<Builder, std::vector<Matrix>>>> cases = {
      {"matmul", {[&](Tape& t, const std::vector<Var>& p) { return t.sum(t.sigmoid(t.matmul(p[0], p[1]))); },
                  {random_matrix(3, 4, rng), random_matrix(4, 2, rng)}}},
      {"sparse_dense_matmul",
       {[&](Tape& t, const std::vector<Var>& p) {
          return t.sum(t.sigmoid(t.sparse_dense_matmul(sparse, p[0])));
        },
        {random_matrix(4, 2, rng)}}},
      {"add", {[&](Tape& t, const std::vector<Var>& p) { return t.sum(t.sigmoid(t.add(p[0], p[1]))); },
               {random_matrix(2, 3, rng), random_matrix(2, 3, rng)}}},
      {"subtract", {[&](Tape& t, const std::vector<Var>& p) { return t.sum(t.sigmoid(t.subtract(p[0], p[1]))); },
                    {random_matrix(2, 3, rng), random_matrix(2, 3, rng)}}},
      {"hadamard", {[&](Tape& t, const std::vector<Var>& p) { return t.sum(t.hadamard(p[0], p[1])); },
                    {random_matrix(2, 3, rng), random_matrix(2, 3, rng)}}},
      {"concat_cols",
       {[&](Tape& t, const std::vector<Var>& p) {
          return t.sum(t.matmul(t.concat_cols({p[0], p[1], p[0]}), t.constant(w5)));
        },
        {random_matrix(3, 2, rng), random_matrix(3, 1, rng)}}},
      {"concat_rows",
       {[&](Tape& t, const std::vector<Var>& p) {
          return t.sum(t.sigmoid(t.matmul(t.concat_rows({p[0], p[1]}), t.constant(w))));
        },
        {random_matrix(2, 3, rng), random_matrix(1, 3, rng)}}},
      {"row_slice", {[&](Tape& t, const std::vector<Var>& p) { return t.sum(t.sigmoid(t.row_slice(p[0], 1, 2))); },
                     {random_matrix(4, 2, rng)}}},
      {"row_select",
       {[&](Tape& t, const std::vector<Var>& p) { return t.sum(t.sigmoid(t.row_select(p[0], {2, 0, 2, 2}))); },
        {random_matrix(3, 2, rng)}}},
      {"sigmoid", {[&](Tape& t, const std::vector<Var>& p) { return t.sum(t.sigmoid(p[0])); },
                   {random_matrix(2, 2, rng, 3.0)}}},
      {"relu", {[&](Tape& t, const std::vector<Var>& p) { return t.sum(t.hadamard(t.relu(p[0]), p[0])); },
                {Matrix::from_rows({{0.3, -0.7}, {1.2, -0.05}})}}},
      {"ln_sigmoid", {[&](Tape& t, const std::vector<Var>& p) { return t.sum(t.ln_sigmoid(p[0])); },
                      {random_matrix(2, 3, rng, 4.0)}}},
      {"mean_over",
       {[&](Tape& t, const std::vector<Var>& p) { return t.sum(t.sigmoid(t.mean_over({p[0], p[1], p[0]}))); },
        {random_matrix(2, 2, rng), random_matrix(2, 2, rng)}}},
      {"segment_mean",
       {[&](Tape& t, const std::vector<Var>& p) { return t.sum(t.sigmoid(t.segment_mean(seg, p[0]))); },
        {random_matrix(4, 3, rng)}}},
      {"scale", {[&](Tape& t, const std::vector<Var>& p) { return t.sum(t.sigmoid(t.scale(p[0], -2.5))); },
                 {random_matrix(2, 2, rng)}}},
      {"row_scale",
       {[&](Tape& t, const std::vector<Var>& p) { return t.sum(t.sigmoid(t.row_scale(p[0], p[1]))); },
        {random_matrix(3, 2, rng), random_matrix(3, 1, rng)}}},
      {"weighted_sum",
       {[&](Tape& t, const std::vector<Var>& p) {
          return t.weighted_sum(t.sigmoid(p[0]), {0.5, -1.0, 2.0, 0.25, 3.0, -0.5});
        },
        {random_matrix(3, 2, rng)}}},
  };
  for (const auto& [name, c] : cases) {
    EXPECT_LT(fd_error(c.first, c.second), 1e-4) << name;
  }
}

TEST(Tape, SparseDenseMatmulMatchesDense) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> dim(1, 20);
  std::bernoulli_distribution keep(0.3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t r = dim(rng), c = dim(rng), k = dim(rng);
    std::vector<SparseMatrix::Entry> entries;
    const Matrix dense_src = random_matrix(r, c, rng);
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) {
        if (keep(rng)) entries.push_back({i, j, dense_src(i, j)});
      }
    }
    auto s = std::make_shared<const SparseMatrix>(SparseMatrix::from_triplets(r, c, entries));
    const Matrix b = random_matrix(c, k, rng);
    Tape t;
    const Matrix sparse_out = t.value(t.sparse_dense_matmul(s, t.constant(b)));
    const Matrix dense_out = consrec::kernels::matmul(s->to_dense(), b);
    for (std::size_t i = 0; i < sparse_out.size(); ++i) {
      ASSERT_LE(std::abs(sparse_out.data()[i] - dense_out.data()[i]), 1e-12);
    }
  }
}

TEST(Tape, IdenticalTapesAreBitIdentical) {
  std::mt19937_64 rng(9);
  const Matrix a = random_matrix(4, 3, rng), b = random_matrix(3, 2, rng);
  auto run = [&] {
    Tape t;
    const Var pa = t.parameter(a), pb = t.parameter(b);
    const Var loss = t.sum(t.ln_sigmoid(t.matmul(t.relu(pa), pb)));
    return std::make_pair(t.value(loss), t.backward(loss));
  };
  const auto r1 = run();
  const auto r2 = run();
  EXPECT_EQ(r1.first, r2.first);
  EXPECT_EQ(r1.second, r2.second);
}

TEST(Tape, ShapeMismatchNamesOpAndShapes) {
  Tape t;
  const Var a = t.constant(Matrix(2, 3)), b = t.constant(Matrix(2, 3));
  try {
    t.matmul(a, b);
    FAIL() << "expected ShapeError";
  } catch (const consrec::ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("matmul"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("2x3"), std::string::npos);
  }
  EXPECT_THROW(t.add(a, t.constant(Matrix(3, 2))), consrec::ShapeError);
  EXPECT_THROW(t.row_scale(a, t.constant(Matrix(3, 1))), consrec::ShapeError);
}

TEST(Tape, NonFiniteResultIsAnError) {
  Tape t;
  const Var big = t.constant(Matrix(1, 1, 1e300));
  EXPECT_THROW(t.hadamard(big, big), consrec::NumericError);
}

TEST(Tape, BackwardRequiresScalarLoss) {
  Tape t;
  const Var x = t.parameter(Matrix(2, 1, 1.0));
  EXPECT_THROW(t.backward(x), consrec::ShapeError);
}

TEST(FiniteDiff, QuadraticIsExactUpToRounding) {
  const std::vector<Matrix> params = {Matrix::from_rows({{0.3, -1.2, 2.0}})};
  auto value = [](const std::vector<Matrix>& p) {
    double s = 0.0;
    for (double v : p[0].data()) s += 1.5 * v * v - v;
    return s;
  };
  auto grad = [](const std::vector<Matrix>& p) {
    Matrix g = p[0];
    for (auto& v : g.data()) v = 3.0 * v - 1.0;
    return std::vector<Matrix>{g};
  };
  EXPECT_LT(consrec::finite_diff_check(value, grad, params, 1e-5), 1e-9);
}

TEST(FiniteDiff, ConstantFunctionHasZeroError) {
  const std::vector<Matrix> params = {Matrix(2, 2, 1.0)};
  auto value = [](const std::vector<Matrix>&) { return 4.0; };
  auto grad = [](const std::vector<Matrix>& p) { return std::vector<Matrix>{Matrix(p[0].rows(), p[0].cols())}; };
  EXPECT_EQ(consrec::finite_diff_check(value, grad, params, 1e-5), 0.0);
}

TEST(FiniteDiff, NonFiniteValueIsAnError) {
  const std::vector<Matrix> params = {Matrix(1, 1, 1.0)};
  auto value = [](const std::vector<Matrix>&) { return NAN; };
  auto grad = [](const std::vector<Matrix>& p) { return p; };
  EXPECT_THROW(consrec::finite_diff_check(value, grad, params, 1e-5), consrec::NumericError);
}
