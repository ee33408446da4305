#pragma once

// Brute-force leave-one-out CV: one row held out at a time, the basis (or PLS
// model) rebuilt on the rest and the regression solved by normal equations on
// explicit balance coordinates. Shares no code with FoldModel.

#include <vector>

#include "plspb/coda.hpp"
#include "plspb/latent.hpp"
#include "plspb/modelsel.hpp"
#include "plspb/pb.hpp"
#include "test_util.hpp"

namespace plspb::testing {

inline std::vector<Index> rows_except(Index n, Index skip) {
  std::vector<Index> rows;
  for (Index i = 0; i < n; ++i)
    if (i != skip) rows.push_back(i);
  return rows;
}

inline Vector select(const Vector& v, const std::vector<Index>& rows) {
  Vector out(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Index>(i)) = v(rows[i]);
  return out;
}

// Leave-one-out RMSEP per k, computed one row at a time with independent
// regression code (normal equations on explicit balance coordinates).
inline Vector loo_oracle(const CompositionMatrix& x, const Vector& y, Method method, Index max_k) {
  const Index n = x.samples();
  Matrix sq = Matrix::Zero(n, max_k);
  for (Index i = 0; i < n; ++i) {
    const auto train = rows_except(n, i);
    const std::vector<Index> test{i};
    const CompositionMatrix xt = x.select_rows(train);
    const Vector yt = select(y, train);
    const CompositionMatrix xo = x.select_rows(test);
    for (Index k = 1; k <= max_k; ++k) {
      double pred = 0.0;
      if (method == Method::PLS_RAW) {
        pred = pls_predict(pls_fit(xt, yt, k), xo)(0);
      } else {
        const BalanceBasis b = method == Method::PLS_PB ? pls_pb(xt, yt) : pca_pb(xt);
        const Matrix zt = clr(xt).values * b.coefficients.leftCols(k);
        const Matrix zo = clr(xo).values * b.coefficients.leftCols(k);
        pred = ols_fitted(zt, yt, zo)(0);
      }
      sq(i, k - 1) = (y(i) - pred) * (y(i) - pred);
    }
  }
  return (sq.colwise().sum() / static_cast<double>(n)).array().sqrt().transpose();
}

}  // namespace plspb::testing
