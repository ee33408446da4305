#pragma once

#include <vector>

#include "plspb/coda.hpp"

namespace plspb {

enum class LatentKind { PLS, PCA };

/// Fitted latent-variable decomposition of centered clr data.
///
/// For PLS, column a of `weights` maps centered clr rows to the a-th score and
/// the scores have unit norm and are mutually orthogonal, so the latent
/// regression coefficients are simply T'y. For PCA, `weights` holds the leading
/// right singular vectors and `explained_variance` the matching eigenvalues of
/// the clr covariance; `latent_coefficients` is empty.
struct LatentModel {
  LatentKind kind = LatentKind::PLS;
  Matrix weights;  // D x k
  Matrix scores;   // n x k
  Vector latent_coefficients;
  Vector x_mean;  // clr column means of the training data
  double y_mean = 0.0;
  Vector explained_variance;  // PCA only
  std::vector<std::string> part_names;

  Index components() const noexcept { return weights.cols(); }
  /// Regression coefficients in clr space using the first `k` components (all when k <= 0).
  Vector clr_coefficients(Index k = 0) const;
};

/// SIMPLS for a single response. `xclr` must be column-centered clr data and
/// `y` centered. `x_mean`/`y_mean` record the removed means for prediction.
LatentModel pls_fit(const ClrMatrix& xclr, const Vector& y, Index k,
                    const Vector& x_mean = Vector(), double y_mean = 0.0);

/// Same as pls_fit, but stops early instead of throwing when the cross-product
/// vanishes before `k` components (the response is already fully explained).
LatentModel pls_fit_upto(const ClrMatrix& xclr, const Vector& y, Index k,
                         const Vector& x_mean = Vector(), double y_mean = 0.0);

/// Convenience: clr, center and fit straight from compositions and a raw response.
LatentModel pls_fit(const CompositionMatrix& x, const Vector& y, Index k);

LatentModel pca_fit(const ClrMatrix& xclr, Index k, const Vector& x_mean = Vector());

/// y_mean + (clr(Xnew) - x_mean) * W_k * v_k with k components (all when k <= 0).
Vector pls_predict(const LatentModel& model, const CompositionMatrix& xnew, Index k = 0);

/// PLS-DA labels: 1 iff the predicted score is at least `threshold`.
std::vector<int> classify(const LatentModel& model, const CompositionMatrix& xnew,
                          double threshold = 0.5, Index k = 0);

std::vector<int> threshold_scores(const Vector& scores, double threshold = 0.5);

/// Flips each column so its entry of largest magnitude (lowest index among
/// ties) is positive. Returns the applied signs.
Vector canonical_signs(Matrix& columns);

}  // namespace plspb
