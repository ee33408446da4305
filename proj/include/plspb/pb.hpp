#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "plspb/coda.hpp"

namespace plspb {

/// Criterion a basis was built and sorted by.
enum class BasisCriterion {
  Covariance,  // |cov(balance, y)|, supervised (PLS-PB)
  Variance,    // var(balance), unsupervised (PCA-PB)
};

/// One node of the sequential binary partition. Part indices are global
/// (columns of the input composition). `balance_column` is the column of the
/// sorted basis holding the numerator-vs-denominator balance chosen here; when
/// the chosen balance leaves parts out, `completion_column` holds the balance
/// contrasting those parts (numerator) against the ones it used (denominator).
struct PartitionNode {
  std::vector<Index> parts;
  std::vector<Index> numerator;
  std::vector<Index> denominator;
  std::vector<Index> zero;
  Index balance_column = -1;
  Index completion_column = -1;
  int numerator_child = -1;
  int denominator_child = -1;
  int zero_child = -1;

  bool is_leaf() const noexcept { return balance_column < 0; }
};

/// Ordered orthonormal balances of a D-part composition.
struct BalanceBasis {
  Matrix coefficients;      // D x K
  Eigen::MatrixXi signs;    // D x K, entries in {-1, 0, +1}
  Vector scores;            // |cov| or variance of each column, non-increasing
  BasisCriterion criterion = BasisCriterion::Covariance;
  std::vector<std::string> part_names;
  std::vector<PartitionNode> tree;  // tree[0] is the root when non-empty

  Index parts() const noexcept { return coefficients.rows(); }
  Index size() const noexcept { return coefficients.cols(); }
  BalanceCoefficients balance(Index k) const;
  SignVector sign_vector(Index k) const;
};

/// Sign vectors derived from a loading vector: the first contrasts the largest
/// and the smallest entry, each following one adds the remaining entry of
/// largest magnitude with its own sign. Zero entries count as positive.
/// Throws OneSidedLoading when `p` has no entry of one of the two signs.
std::vector<SignVector> candidate_signs(const Vector& p);

struct BalanceChoice {
  BalanceCoefficients balance;
  Index candidate = 0;  // position in the candidate list
  double score = 0.0;
};

/// Candidate maximising |cov(ln(Xsub) b, y)| (sample covariance, divisor n - 1).
/// Ties within 1e-12 go to the smaller support, then the earlier candidate.
BalanceChoice best_balance(const CompositionMatrix& xsub, const Vector& y,
                           const std::vector<SignVector>& candidates);

/// Same selection rule with var(ln(Xsub) b) as the criterion.
BalanceChoice best_balance_variance(const CompositionMatrix& xsub,
                                    const std::vector<SignVector>& candidates);

BalanceBasis pls_pb(const CompositionMatrix& x, const Vector& y);

BalanceBasis pca_pb(const CompositionMatrix& x);

/// clr(X) * B[:, 0..k) (all columns when k <= 0).
Matrix balance_coordinates(const CompositionMatrix& x, const BalanceBasis& basis, Index k = 0);

struct BasisCheck {
  double orthonormality_error = 0.0;  // max |B'B - I|
  double zero_sum_error = 0.0;        // max |column sum|
  double coefficient_error = 0.0;     // max deviation from the r/s closed form
  bool nested = true;                 // supports pairwise disjoint or nested inside one group
  bool sorted = true;                 // scores non-increasing

  bool ok() const noexcept {
    return orthonormality_error <= kOrthonormalTol && zero_sum_error <= kIdentityTol &&
           coefficient_error <= kIdentityTol && nested && sorted;
  }
};

BasisCheck verify_basis(const BalanceBasis& basis);

std::string to_string(BasisCriterion criterion);

}  // namespace plspb
