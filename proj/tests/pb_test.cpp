#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "plspb/coda.hpp"
#include "plspb/error.hpp"
#include "plspb/pb.hpp"
#include "plspb/simgen.hpp"
#include "test_util.hpp"

using namespace plspb;
using plspb::testing::random_composition;
using plspb::testing::random_vector;
using plspb::testing::sample_cov;
using plspb::testing::sbp_nested;

namespace {

SignVector sv(std::vector<std::int8_t> s) { return SignVector(std::move(s)); }

void expect_valid_basis(const BalanceBasis& b, Index d) {
  ASSERT_EQ(b.size(), d - 1);
  ASSERT_EQ(b.parts(), d);
  const Matrix& B = b.coefficients;
  EXPECT_LT((B.transpose() * B - Matrix::Identity(d - 1, d - 1)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT(B.colwise().sum().cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_TRUE(sbp_nested(B));
  for (Index k = 1; k < b.size(); ++k) EXPECT_LE(b.scores(k), b.scores(k - 1) * (1 + 1e-12) + 1e-300);
  // columns agree with the recorded signs and the closed form
  for (Index k = 0; k < b.size(); ++k) {
    const auto expect = signs_to_coefficients(b.sign_vector(k)).coeffs;
    EXPECT_LT((expect - B.col(k)).cwiseAbs().maxCoeff(), 1e-12);
  }
  EXPECT_TRUE(verify_basis(b).ok());
}

}  // namespace

TEST(CandidateSigns, Walkthrough) {
  Vector p(4);
  p << 0.9, 0.1, -0.2, -0.8;
  const auto c = candidate_signs(p);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[0], sv({1, 0, 0, -1}));
  EXPECT_EQ(c[1], sv({1, 0, -1, -1}));
  EXPECT_EQ(c[2], sv({1, 1, -1, -1}));
}

TEST(CandidateSigns, TwoPartsAndGrowth) {
  Vector p(2);
  p << 1, -1;
  const auto c = candidate_signs(p);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0], sv({1, -1}));

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    Vector q = random_vector(2 + trial, rng);
    q.array() -= q.mean();
    const auto cands = candidate_signs(q);
    ASSERT_EQ(static_cast<Index>(cands.size()), q.size() - 1);
    Index top_pos, top_neg;
    q.maxCoeff(&top_pos);
    q.minCoeff(&top_neg);
    EXPECT_EQ(cands[0][top_pos], 1);
    EXPECT_EQ(cands[0][top_neg], -1);
    for (std::size_t j = 0; j < cands.size(); ++j) {
      EXPECT_EQ(cands[j].support(), static_cast<int>(j) + 2);
      if (j > 0) {
        int changed = 0;
        for (Index i = 0; i < q.size(); ++i) {
          if (cands[j][i] != cands[j - 1][i]) {
            ++changed;
            EXPECT_EQ(cands[j - 1][i], 0);
            EXPECT_EQ(cands[j][i], q(i) >= 0 ? 1 : -1);
          }
        }
        EXPECT_EQ(changed, 1);
      }
    }
  }
}

TEST(CandidateSigns, OneSidedLoadingIsAnError) {
  Vector p(3);
  p << 0.5, 0.2, 0.1;
  try {
    candidate_signs(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::OneSidedLoading);
  }
}

TEST(BestBalance, SingleCandidateAndPlantedWinner) {
  std::mt19937_64 rng(5);
  const auto x = random_composition(50, 5, rng);
  const Vector y = random_vector(50, rng);
  const std::vector<SignVector> one{sv({1, -1, 0, 0, 0})};
  const auto c1 = best_balance(x, y, one);
  EXPECT_EQ(c1.candidate, 0);
  EXPECT_LT((c1.balance.coeffs - signs_to_coefficients(one[0]).coeffs).norm(), 1e-15);

  const std::vector<SignVector> cands{sv({1, 0, 0, 0, -1}), sv({1, 0, 0, -1, -1}), sv({1, 1, 0, -1, -1}),
                                      sv({1, 1, -1, -1, -1})};
  const Vector target = 3.0 * balance_values(x, signs_to_coefficients(cands[2]));
  const auto c2 = best_balance(x, target, cands);
  EXPECT_EQ(c2.candidate, 2);
  for (const auto& s : cands) {
    EXPECT_GE(c2.score + 1e-15, std::abs(sample_cov(balance_values(x, signs_to_coefficients(s)), target)));
  }
  EXPECT_NEAR(c2.score, std::abs(sample_cov(balance_values(x, c2.balance), target)), 1e-12);
}

TEST(BestBalance, TiesPreferSmallerSupport) {
  // y constant-free but orthogonal to everything: all scores 0, so the
  // smallest support (first candidate) must win even if listed later.
  std::mt19937_64 rng(9);
  const auto x = random_composition(10, 4, rng);
  const Vector y = Vector::Zero(10);
  const std::vector<SignVector> cands{sv({1, 1, -1, -1}), sv({1, 0, -1, 0}), sv({1, 0, -1, -1})};
  const auto c = best_balance(x, y, cands);
  EXPECT_EQ(c.candidate, 1);
  // equal support and equal score: first index wins
  const std::vector<SignVector> same{sv({1, -1, 0, 0}), sv({0, 0, 1, -1})};
  EXPECT_EQ(best_balance(x, y, same).candidate, 0);
}

TEST(BestBalanceVariance, PicksLargestVariance) {
  std::mt19937_64 rng(10);
  Matrix v = random_composition(40, 4, rng, 0.1).values();
  std::normal_distribution<double> wide(0.0, 3.0);
  for (Index i = 0; i < 40; ++i) v(i, 3) *= std::exp(wide(rng));
  const CompositionMatrix x = closure(v);
  const std::vector<SignVector> cands{sv({1, -1, 0, 0}), sv({1, 0, 0, -1}), sv({1, 1, -1, 0})};
  const auto c = best_balance_variance(x, cands);
  EXPECT_EQ(c.candidate, 1);
  const Vector b = balance_values(x, c.balance);
  EXPECT_NEAR(c.score, sample_cov(b, b), 1e-12);
}

TEST(PlsPb, TwoParts) {
  std::mt19937_64 rng(1);
  const auto x = random_composition(10, 2, rng);
  const auto b = pls_pb(x, random_vector(10, rng));
  ASSERT_EQ(b.size(), 1);
  EXPECT_NEAR(std::abs(b.coefficients(0, 0)), 1 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(b.coefficients(0, 0), -b.coefficients(1, 0), 1e-15);
  const auto p = pca_pb(x);
  ASSERT_EQ(p.size(), 1);
  EXPECT_NEAR(std::abs(p.coefficients(0, 0)), 1 / std::sqrt(2.0), 1e-15);
}

TEST(PlsPb, RandomInstancesAreValidSbps) {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> dd(3, 30), nn(5, 80);
  for (int trial = 0; trial < 40; ++trial) {
    const Index d = dd(rng);
    const Index n = nn(rng);
    const auto x = random_composition(n, d, rng);
    const Vector y = random_vector(n, rng);
    SCOPED_TRACE("D=" + std::to_string(d) + " n=" + std::to_string(n));
    const auto b = pls_pb(x, y);
    expect_valid_basis(b, d);
    // scores are the |cov| of the stored columns
    const Matrix coords = balance_coordinates(x, b);
    for (Index k = 0; k < b.size(); ++k) {
      EXPECT_NEAR(b.scores(k), std::abs(sample_cov(coords.col(k), y)), 1e-10 * (1 + b.scores(0)));
    }
    expect_valid_basis(pca_pb(x), d);
  }
}

TEST(PlsPb, HighDimensionalFewSamples) {
  std::mt19937_64 rng(78);
  const auto x = random_composition(12, 120, rng);
  const Vector y = random_vector(12, rng);
  expect_valid_basis(pls_pb(x, y), 120);
  expect_valid_basis(pca_pb(x), 120);
}

TEST(PlsPb, TreeMirrorsBasis) {
  std::mt19937_64 rng(79);
  const Index d = 15;
  const auto x = random_composition(40, d, rng);
  const auto b = pls_pb(x, random_vector(40, rng));
  ASSERT_FALSE(b.tree.empty());
  EXPECT_EQ(static_cast<Index>(b.tree[0].parts.size()), d);
  std::set<Index> columns;
  for (const auto& node : b.tree) {
    if (node.parts.size() < 2) {
      EXPECT_TRUE(node.is_leaf());
      continue;
    }
    ASSERT_FALSE(node.is_leaf());
    columns.insert(node.balance_column);
    std::vector<Index> all = node.numerator;
    all.insert(all.end(), node.denominator.begin(), node.denominator.end());
    all.insert(all.end(), node.zero.begin(), node.zero.end());
    std::sort(all.begin(), all.end());
    std::vector<Index> parts = node.parts;
    std::sort(parts.begin(), parts.end());
    EXPECT_EQ(all, parts);
    const SignVector s = b.sign_vector(node.balance_column);
    for (Index i : node.numerator) EXPECT_EQ(s[i], 1);
    for (Index i : node.denominator) EXPECT_EQ(s[i], -1);
    EXPECT_EQ(node.zero.empty(), node.completion_column < 0);
    if (node.completion_column >= 0) {
      columns.insert(node.completion_column);
      const SignVector c = b.sign_vector(node.completion_column);
      for (Index i : node.zero) EXPECT_EQ(c[i], 1);
      for (Index i : node.numerator) EXPECT_EQ(c[i], -1);
      for (Index i : node.denominator) EXPECT_EQ(c[i], -1);
    }
    if (node.numerator.size() > 1) {
      ASSERT_GE(node.numerator_child, 0);
      EXPECT_EQ(b.tree[static_cast<std::size_t>(node.numerator_child)].parts, node.numerator);
    }
  }
  EXPECT_EQ(static_cast<Index>(columns.size()), d - 1);
}

TEST(PlsPb, RowScalingLeavesSignsUnchanged) {
  std::mt19937_64 rng(80);
  const auto x = random_composition(30, 12, rng);
  const Vector y = random_vector(30, rng);
  Matrix scaled = x.values();
  std::uniform_real_distribution<double> lambda(0.1, 1000.0);
  for (Index i = 0; i < scaled.rows(); ++i) scaled.row(i) *= lambda(rng);
  EXPECT_EQ(pls_pb(x, y).signs, pls_pb(CompositionMatrix(scaled), y).signs);
  EXPECT_EQ(pca_pb(x).signs, pca_pb(CompositionMatrix(scaled)).signs);
}

TEST(PlsPb, FirstBalanceBeatsRootCandidates) {
  std::mt19937_64 rng(81);
  for (Index d = 3; d <= 5; ++d) {
    for (int trial = 0; trial < 10; ++trial) {
      const auto x = random_composition(25, d, rng);
      const Vector y = random_vector(25, rng);
      const Matrix xc = center_columns(clr(x)).values;
      const Vector yc = y.array() - y.mean();
      Vector g = xc.transpose() * yc;
      g.normalize();
      const auto b = pls_pb(x, y);
      for (const auto& s : candidate_signs(g)) {
        const double cov = std::abs(sample_cov(balance_values(x, signs_to_coefficients(s)), y));
        EXPECT_GE(b.scores(0) + 1e-12, cov);
      }
    }
  }
}

TEST(PcaPb, VariancesSumToTotalClrVariance) {
  std::mt19937_64 rng(82);
  const auto x = random_composition(60, 11, rng);
  const auto b = pca_pb(x);
  const ClrMatrix xc = center_columns(clr(x));
  const double total = xc.values.squaredNorm() / 59.0;
  EXPECT_NEAR(b.scores.sum(), total, 1e-8);
  EXPECT_EQ(b.criterion, BasisCriterion::Variance);
}

TEST(PlsPb, Determinism) {
  std::mt19937_64 rng(83);
  const auto x = random_composition(30, 20, rng);
  const Vector y = random_vector(30, rng);
  const auto a = pls_pb(x, y);
  const auto b = pls_pb(x, y);
  EXPECT_EQ(a.signs, b.signs);
  EXPECT_EQ(a.coefficients, b.coefficients);
  EXPECT_EQ(a.scores, b.scores);
}

TEST(PlsPb, Errors) {
  std::mt19937_64 rng(84);
  const auto x = random_composition(10, 4, rng);
  try {
    pls_pb(x, Vector(Vector::Constant(10, 2.0)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ConstantResponse);
  }
  const auto tiny = random_composition(2, 4, rng);
  try {
    pls_pb(tiny, random_vector(2, rng));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::TooFewSamples);
  }
  EXPECT_THROW(pls_pb(x, random_vector(9, rng)), Error);
}

TEST(PlsPb, DegenerateSubcompositionsStillYieldABasis) {
  // parts 3..5 are identical copies of each other: their sub-clr is constant.
  std::mt19937_64 rng(85);
  Matrix v = random_composition(20, 6, rng).values();
  for (Index i = 0; i < 20; ++i) v(i, 4) = v(i, 5) = v(i, 3);
  const CompositionMatrix x = closure(v);
  const Vector y = random_vector(20, rng);
  expect_valid_basis(pls_pb(x, y), 6);
  expect_valid_basis(pca_pb(x), 6);
}

TEST(PlsPb, OneBlockScenarioFirstBalanceCapturesMarkers) {
  SimScenario s = SimScenario::defaults(SimCase::OneBlock);
  s.seed = 2024;
  const SimDataset data = simulate_dataset(s);
  const auto basis = pls_pb(data.x, data.y);
  const MarkerRecovery r = marker_recovery(basis, data.marker_mask);
  EXPECT_GT(r.markers_included, 10);
}
