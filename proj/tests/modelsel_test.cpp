#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "plspb/coda.hpp"
#include "plspb/error.hpp"
#include "plspb/latent.hpp"
#include "plspb/modelsel.hpp"
#include "plspb/pb.hpp"
#include "loo_oracle.hpp"
#include "test_util.hpp"

using namespace plspb;
using plspb::testing::loo_oracle;
using plspb::testing::ols_fitted;
using plspb::testing::select;
using plspb::testing::random_composition;
using plspb::testing::random_vector;

namespace {

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::InvalidArgument;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST(Rmsep, Examples) {
  EXPECT_EQ(rmsep(vec({1, 2, 3}), vec({1, 2, 3})), 0.0);
  EXPECT_NEAR(rmsep(vec({0, 3}), vec({0, 0})), std::sqrt(4.5), 1e-15);
  EXPECT_NEAR(rmsep(vec({3, 0}), vec({0, 0})), rmsep(vec({0, 3}), vec({0, 0})), 1e-15);
  EXPECT_EQ(code_of([] { rmsep(Vector(), Vector()); }), Errc::EmptyInput);
  EXPECT_EQ(code_of([] { rmsep(vec({1}), vec({1, 2})); }), Errc::DimensionMismatch);
}

TEST(Rmsep, BruteForce) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = 1 + trial % 37;
    const Vector y = random_vector(n, rng), yhat = random_vector(n, rng);
    double s = 0.0;
    for (Index i = 0; i < n; ++i) s += (y(i) - yhat(i)) * (y(i) - yhat(i));
    EXPECT_NEAR(rmsep(y, yhat), std::sqrt(s / static_cast<double>(n)), 1e-12);
    EXPECT_GT(rmsep(y, yhat), 0.0);
  }
}

TEST(MisclassificationError, Examples) {
  const std::vector<int> y{0, 1, 1, 0}, yhat{0, 0, 1, 0}, comp{1, 0, 0, 1};
  EXPECT_EQ(misclassification_error(y, y), 0.0);
  EXPECT_EQ(misclassification_error(y, yhat), 0.25);
  EXPECT_EQ(misclassification_error(y, comp), 1.0);
  EXPECT_EQ(misclassification_error(vec({0, 1, 1, 0}), vec({0, 0, 1, 0})), 0.25);
  const std::vector<int> bad{0, 2, 1, 0};
  EXPECT_EQ(code_of([&] { misclassification_error(y, bad); }), Errc::NonBinary);
  EXPECT_EQ(code_of([] { misclassification_error(vec({0, 0.5}), vec({0, 1})); }), Errc::NonBinary);
  const std::vector<int> shorter{0, 1};
  EXPECT_EQ(code_of([&] { misclassification_error(y, shorter); }), Errc::DimensionMismatch);
}

TEST(OneSeSelect, Examples) {
  EXPECT_EQ(one_se_select(vec({5, 4, 3, 2}), vec({0, 0, 0, 0})), 4);
  EXPECT_EQ(one_se_select(vec({5, 3, 2.9, 2.95}), vec({0.2, 0.2, 0.2, 0.2})), 2);
  EXPECT_EQ(one_se_select(vec({1.5}), vec({0.1})), 1);
  // ties at the minimum: the SD of the first minimiser is used
  EXPECT_EQ(one_se_select(vec({3, 1, 2, 1}), vec({0, 0, 5, 0})), 2);
}

TEST(OneSeSelect, NeverBeyondArgmin) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const Index k = 1 + trial % 12;
    Vector m(k), s(k);
    for (Index i = 0; i < k; ++i) {
      m(i) = u(rng);
      s(i) = 0.3 * u(rng);
    }
    Index arg;
    m.minCoeff(&arg);
    const Index chosen = one_se_select(m, s);
    EXPECT_LE(chosen, arg + 1);
    EXPECT_LE(m(chosen - 1), m(arg) + s(arg));
    for (Index j = 0; j + 1 < chosen; ++j) EXPECT_GT(m(j), m(arg) + s(arg));
  }
}

TEST(FitOnBalances, FullBasesAgree) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Index d = 3 + trial;
    const Index n = 2 * d + 4;
    const auto x = random_composition(n, d, rng);
    const Vector y = random_vector(n, rng);
    const auto a = fit_on_balances(x, y, pls_pb(x, y), d - 1);
    const auto b = fit_on_balances(x, y, pca_pb(x), d - 1);
    EXPECT_LT((a.predict(x) - b.predict(x)).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((a.predict(x) - ols_fitted(clr(x).values * pivot_basis(d), y, clr(x).values * pivot_basis(d)))
                  .cwiseAbs()
                  .maxCoeff(),
              1e-8);
  }
}

TEST(FitOnBalances, ConstantResponseAndPlantedBalance) {
  std::mt19937_64 rng(4);
  const auto x = random_composition(30, 6, rng);
  const BalanceBasis basis = pca_pb(x);
  const auto flat = fit_on_balances(x, Vector::Constant(30, 2.5), basis, 3);
  EXPECT_NEAR(flat.intercept, 2.5, 1e-12);
  EXPECT_LT(flat.slopes.cwiseAbs().maxCoeff(), 1e-12);

  const Vector y = 1.0 + 4.0 * balance_coordinates(x, basis, 1).col(0).array();
  const auto planted = fit_on_balances(x, y, basis, 1);
  EXPECT_LT((planted.predict(x) - y).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_NEAR(planted.slopes(0), 4.0, 1e-8);
}

TEST(FitOnBalances, InSampleErrorNonIncreasing) {
  std::mt19937_64 rng(5);
  const auto x = random_composition(40, 12, rng);
  const Vector y = random_vector(40, rng);
  for (const BalanceBasis& b : {pls_pb(x, y), pca_pb(x)}) {
    double last = INFINITY;
    for (Index k = 1; k <= 11; ++k) {
      const double e = rmsep(y, fit_on_balances(x, y, b, k).predict(x));
      EXPECT_LE(e, last + 1e-12);
      last = e;
    }
  }
}

TEST(FitOnBalances, Errors) {
  std::mt19937_64 rng(6);
  const auto x = random_composition(4, 8, rng);
  const Vector y = random_vector(4, rng);
  const auto basis = pca_pb(x);
  EXPECT_EQ(code_of([&] { fit_on_balances(x, y, basis, 4); }), Errc::Collinear);
  EXPECT_EQ(code_of([&] { fit_on_balances(x, y, basis, 0); }), Errc::InvalidArgument);
  EXPECT_NO_THROW(fit_on_balances(x, y, basis, 3));
}

TEST(AssignFolds, SizesAndCoverage) {
  Rng rng = make_stream(9);
  const auto f = assign_folds(23, 5, rng);
  std::vector<int> size(5, 0);
  for (int v : f) ++size[static_cast<std::size_t>(v)];
  EXPECT_EQ(size, (std::vector<int>{5, 5, 5, 4, 4}));
  Rng again = make_stream(9);
  EXPECT_EQ(assign_folds(23, 5, again), f);
  EXPECT_THROW(assign_folds(3, 5, rng), Error);
  EXPECT_THROW(assign_folds(10, 1, rng), Error);
}

TEST(MaxSupportedK, Formula) {
  EXPECT_EQ(max_supported_k(250, 100, 5), 99);
  EXPECT_EQ(max_supported_k(50, 100, 5), 39);
  EXPECT_EQ(max_supported_k(6, 4, 6), 3);
  EXPECT_EQ(max_supported_k(12, 5, 5), 4);
}

TEST(CrossValidate, LeaveOneOutMatchesOracle) {
  std::mt19937_64 rng(10);
  const auto x = random_composition(6, 4, rng);
  const Vector y = random_vector(6, rng);
  for (Method m : {Method::PLS_PB, Method::PCA_PB, Method::PLS_RAW}) {
    CvOptions o;
    o.method = m;
    o.folds = 6;
    o.repeats = 1;
    o.seed = 99;
    const CvResult r = cross_validate(x, y, o);
    ASSERT_EQ(r.mean_error.size(), 3);
    const Vector oracle = loo_oracle(x, y, m, 3);
    EXPECT_LT((r.mean_error - oracle).cwiseAbs().maxCoeff(), 1e-10) << to_string(m);
    EXPECT_EQ(r.sd_error.size(), 3);
  }
}

TEST(CrossValidate, DeterministicAndSeedSensitive) {
  std::mt19937_64 rng(11);
  const auto x = random_composition(40, 10, rng);
  const Vector y = random_vector(40, rng);
  CvOptions o;
  o.repeats = 4;
  o.seed = 5;
  o.max_k = 6;
  const CvResult a = cross_validate(x, y, o);
  o.threads = 1;
  const CvResult b = cross_validate(x, y, o);
  EXPECT_EQ(a.per_repeat, b.per_repeat);
  EXPECT_EQ(a.selected_k, b.selected_k);
  o.seed = 6;
  const CvResult c = cross_validate(x, y, o);
  EXPECT_NE(a.per_repeat, c.per_repeat);
  EXPECT_EQ(a.component_counts, (std::vector<Index>{1, 2, 3, 4, 5, 6}));
  EXPECT_EQ(a.folds, 5);
  EXPECT_EQ(a.repeats, 4);
  EXPECT_GE(a.mean_error.minCoeff(), 0.0);
}

TEST(CrossValidate, HeldOutRowsDoNotLeak) {
  std::mt19937_64 rng(12);
  const auto x = random_composition(30, 8, rng);
  const Vector y = random_vector(30, rng);
  Rng frng = make_stream(3);
  const auto fold_of = assign_folds(30, 5, frng);
  for (Method m : {Method::PLS_PB, Method::PCA_PB, Method::PLS_RAW}) {
    const Matrix base = cv_predictions(x, y, m, 5, fold_of);
    // scramble responses and compositions of fold 0: predictions for the other
    // folds change, fold 0's must not
    Vector y2 = y;
    Matrix v2 = x.values();
    for (Index i = 0; i < 30; ++i) {
      if (fold_of[static_cast<std::size_t>(i)] == 0) {
        y2(i) = 1000.0 + static_cast<double>(i);
        v2.row(i) = random_composition(1, 8, rng).values().row(0);
      }
    }
    const Matrix moved = cv_predictions(CompositionMatrix(v2), y2, m, 5, fold_of);
    std::vector<Index> train;
    for (Index i = 0; i < 30; ++i)
      if (fold_of[static_cast<std::size_t>(i)] != 0) train.push_back(i);
    const FoldModel model(m, x.select_rows(train), select(y, train), 5);
    for (Index i = 0; i < 30; ++i) {
      if (fold_of[static_cast<std::size_t>(i)] != 0) continue;
      const std::vector<Index> one{i};
      const Matrix direct = model.predict_all(CompositionMatrix(v2).select_rows(one));
      EXPECT_LT((moved.row(i) - direct.row(0)).cwiseAbs().maxCoeff(), 1e-10) << to_string(m);
    }
    // a training fold's model ignores what is in its own test rows
    EXPECT_GT((moved - base).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(CrossValidate, MisclassificationMetric) {
  std::mt19937_64 rng(13);
  const auto x = random_composition(40, 6, rng);
  Vector y(40);
  for (Index i = 0; i < 40; ++i) y(i) = static_cast<double>(i % 2);
  CvOptions o;
  o.metric = Metric::ME;
  o.repeats = 3;
  for (Method m : {Method::PLS_PB, Method::PCA_PB, Method::PLS_RAW}) {
    o.method = m;
    const CvResult r = cross_validate(x, y, o);
    EXPECT_GE(r.per_repeat.minCoeff(), 0.0);
    EXPECT_LE(r.per_repeat.maxCoeff(), 1.0);
    // every error is a multiple of 1/n
    for (Index i = 0; i < r.per_repeat.size(); ++i) {
      const double scaled = r.per_repeat.data()[i] * 40.0;
      EXPECT_NEAR(scaled, std::round(scaled), 1e-9);
    }
  }
  const Vector cont = random_vector(40, rng);
  EXPECT_EQ(code_of([&] { cross_validate(x, cont, o); }), Errc::NonBinary);
}

TEST(CrossValidate, Errors) {
  std::mt19937_64 rng(14);
  const auto x = random_composition(12, 5, rng);
  const Vector y = random_vector(12, rng);
  CvOptions o;
  o.max_k = 5;
  EXPECT_EQ(code_of([&] { cross_validate(x, y, o); }), Errc::TooFewSamples);
  o.max_k = 0;
  o.folds = 13;
  EXPECT_EQ(code_of([&] { cross_validate(x, y, o); }), Errc::TooFewSamples);
  o.folds = 1;
  EXPECT_THROW(cross_validate(x, y, o), Error);
}

TEST(SummarizeErrors, MeanSdAndSelection) {
  Matrix runs(3, 2);
  runs << 1, 2, 3, 2, 5, 2;
  const CvResult r = summarize_errors(runs, Method::PCA_PB, Metric::RMSEP, 5);
  EXPECT_NEAR(r.mean_error(0), 3.0, 1e-15);
  EXPECT_NEAR(r.sd_error(0), 2.0, 1e-15);
  EXPECT_NEAR(r.mean_error(1), 2.0, 1e-15);
  EXPECT_NEAR(r.sd_error(1), 0.0, 1e-15);
  EXPECT_EQ(r.selected_k, 2);
  EXPECT_EQ(r.repeats, 3);
}

TEST(MethodNames, RoundTrip) {
  for (Method m : {Method::PLS_PB, Method::PCA_PB, Method::PLS_RAW}) EXPECT_EQ(parse_method(to_string(m)), m);
  for (Metric m : {Metric::RMSEP, Metric::ME}) EXPECT_EQ(parse_metric(to_string(m)), m);
  EXPECT_THROW(parse_method("lasso"), Error);
}
