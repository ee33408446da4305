#pragma once

// Helpers shared by the unit tests and the acceptance binary. The oracles here
// deliberately avoid the library's own code paths (no SIMPLS, no QR on
// balance designs) so they can catch errors in them.

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "plspb/coda.hpp"

namespace plspb::testing {

/// Random composition with log-normal parts; `spread` scales the log-sd.
inline CompositionMatrix random_composition(Index n, Index d, std::mt19937_64& rng, double spread = 1.0) {
  std::normal_distribution<double> normal(0.0, spread);
  Matrix raw(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) raw(i, j) = std::exp(normal(rng));
  }
  return closure(raw);
}

inline Vector random_vector(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

/// clr by the textbook formula: ln(x / geometric mean) with the geometric mean
/// taken as a plain product root (fine for the small, moderate data used here).
inline Matrix clr_oracle(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (Index i = 0; i < x.rows(); ++i) {
    double prod = 1.0;
    for (Index j = 0; j < x.cols(); ++j) prod *= x(i, j);
    const double g = std::pow(prod, 1.0 / static_cast<double>(x.cols()));
    for (Index j = 0; j < x.cols(); ++j) out(i, j) = std::log(x(i, j) / g);
  }
  return out;
}

/// Minimum-norm least squares fitted values of y on [1, X] via a complete
/// orthogonal decomposition (pseudo-inverse).
inline Vector pinv_fitted(const Matrix& x, const Vector& y, const Matrix& xnew) {
  Matrix design(x.rows(), x.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(x.cols()) = x;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(design);
  cod.setThreshold(1e-10);
  const Vector coef = cod.solve(y);
  Matrix dnew(xnew.rows(), xnew.cols() + 1);
  dnew.col(0).setOnes();
  dnew.rightCols(xnew.cols()) = xnew;
  return dnew * coef;
}

/// Normal-equations OLS with intercept, solved by an LDLT of the Gram matrix.
/// Independent of the Householder path used by the library.
inline Vector ols_fitted(const Matrix& x, const Vector& y, const Matrix& xnew) {
  Matrix design(x.rows(), x.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(x.cols()) = x;
  const Vector coef = (design.transpose() * design).ldlt().solve(design.transpose() * y);
  Matrix dnew(xnew.rows(), xnew.cols() + 1);
  dnew.col(0).setOnes();
  dnew.rightCols(xnew.cols()) = xnew;
  return dnew * coef;
}

inline double sample_cov(const Vector& a, const Vector& b) {
  const double ma = a.mean();
  const double mb = b.mean();
  double s = 0.0;
  for (Index i = 0; i < a.size(); ++i) s += (a(i) - ma) * (b(i) - mb);
  return s / static_cast<double>(a.size() - 1);
}

/// Support of a balance column as a sign pattern.
inline std::vector<int> sign_pattern(const Vector& coeffs, double tol = 1e-14) {
  std::vector<int> s(static_cast<std::size_t>(coeffs.size()));
  for (Index i = 0; i < coeffs.size(); ++i) {
    s[static_cast<std::size_t>(i)] = coeffs(i) > tol ? 1 : (coeffs(i) < -tol ? -1 : 0);
  }
  return s;
}

/// Checks the sequential-binary-partition property directly on a coefficient
/// matrix: any two supports are disjoint, or one lies within a single sign
/// group of the other.
inline bool sbp_nested(const Matrix& b) {
  const auto inside_group = [](const std::vector<int>& inner, const std::vector<int>& outer) {
    bool pos = true, neg = true;
    for (std::size_t i = 0; i < inner.size(); ++i) {
      if (inner[i] == 0) continue;
      pos = pos && outer[i] == 1;
      neg = neg && outer[i] == -1;
    }
    return pos || neg;
  };
  for (Index a = 0; a < b.cols(); ++a) {
    const auto sa = sign_pattern(b.col(a));
    for (Index c = a + 1; c < b.cols(); ++c) {
      const auto sc = sign_pattern(b.col(c));
      bool overlap = false;
      for (std::size_t i = 0; i < sa.size(); ++i) overlap = overlap || (sa[i] != 0 && sc[i] != 0);
      if (overlap && !inside_group(sa, sc) && !inside_group(sc, sa)) return false;
    }
  }
  return true;
}

}  // namespace plspb::testing
