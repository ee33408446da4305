#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "plspb/coda.hpp"
#include "plspb/latent.hpp"
#include "plspb/pb.hpp"
#include "plspb/rng.hpp"

namespace plspb {

enum class Method { PLS_PB, PCA_PB, PLS_RAW };
enum class Metric { RMSEP, ME };

std::string to_string(Method method);
std::string to_string(Metric metric);
Method parse_method(const std::string& name);
Metric parse_metric(const std::string& name);

/// OLS of y on the first k balance coordinates plus an intercept.
struct BalanceRegression {
  Matrix basis;  // D x k coefficient columns used as regressors
  double intercept = 0.0;
  Vector slopes;

  Vector predict(const CompositionMatrix& x) const;
};

BalanceRegression fit_on_balances(const CompositionMatrix& x, const Vector& y,
                                  const BalanceBasis& basis, Index k);

double rmsep(const Vector& y, const Vector& yhat);

double misclassification_error(std::span<const int> y, std::span<const int> yhat);
/// Overload for 0/1 values stored as doubles; anything else is NonBinary.
double misclassification_error(const Vector& y, const Vector& yhat);

/// Smallest 1-based k whose mean error is within one SD of the minimum; the
/// SD is the one at the (first) minimising k.
Index one_se_select(const Vector& mean_error, const Vector& sd_error);

/// A model fitted on one training fold that predicts with any model size up
/// to `max_k`. Balance methods share one QR factorisation of the nested
/// designs; PLS_RAW keeps every SIMPLS component.
class FoldModel {
 public:
  FoldModel(Method method, const CompositionMatrix& xtrain, const Vector& ytrain, Index max_k);

  /// Predictions (response scale) on `xtest` for k = 1..max_k, one column per k.
  Matrix predict_all(const CompositionMatrix& xtest) const;

  Method method() const noexcept { return method_; }
  Index max_k() const noexcept { return max_k_; }
  /// Intercept and slopes of the size-k model, for leakage checks.
  Vector coefficients(Index k) const;

 private:
  Method method_;
  Index max_k_;
  Matrix basis_;        // D x max_k balance coefficients (balance methods)
  Matrix solutions_;    // (max_k + 1) x max_k; column k-1 = [intercept, slopes...]
  LatentModel latent_;  // PLS_RAW
};

struct CvOptions {
  Method method = Method::PLS_PB;
  Metric metric = Metric::RMSEP;
  Index max_k = 0;  // 0: largest size every training fold supports
  int folds = 5;
  int repeats = 1;
  std::uint64_t seed = 1;
  double threshold = 0.5;
  unsigned threads = 0;
};

struct CvResult {
  Method method = Method::PLS_PB;
  Metric metric = Metric::RMSEP;
  std::vector<Index> component_counts;  // 1..K
  Vector mean_error;
  Vector sd_error;
  Matrix per_repeat;  // repeats x K
  Index selected_k = 1;
  int folds = 0;
  int repeats = 0;
};

/// Fold index of every row: seeded shuffle, contiguous slices, the first
/// n % folds folds one row larger.
std::vector<int> assign_folds(Index n, int folds, Rng& rng);

/// Largest model size every training fold of an n-row, D-part dataset can fit.
Index max_supported_k(Index n, Index parts, int folds);

/// Held-out predictions (n x K) for one shuffle of the rows.
Matrix cv_predictions(const CompositionMatrix& x, const Vector& y, Method method, Index max_k,
                      std::span<const int> fold_of);

/// Per-k error of a prediction matrix against y under the given metric.
Vector prediction_errors(const Vector& y, const Matrix& predictions, Metric metric,
                         double threshold = 0.5);

CvResult cross_validate(const CompositionMatrix& x, const Vector& y, const CvOptions& options);

/// Mean/SD across rows of a runs x K error matrix plus the one-SE choice.
CvResult summarize_errors(const Matrix& per_run, Method method, Metric metric, int folds);

}  // namespace plspb
