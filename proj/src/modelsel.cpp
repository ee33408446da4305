#include "plspb/modelsel.hpp"

#include <algorithm>
#include <cmath>

#include "plspb/error.hpp"

namespace plspb {
namespace {

constexpr double kCollinearTol = 1e-10;

Matrix design_with_intercept(const Matrix& coords) {
  Matrix design(coords.rows(), coords.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(coords.cols()) = coords;
  return design;
}

// Solutions of the nested least-squares problems on the leading 1+k columns,
// k = 1..max_k, from one Householder QR of the full design.
Matrix nested_solutions(const Matrix& design, const Vector& y) {
  const Index cols = design.cols();
  if (design.rows() < cols) {
    throw Error(Errc::Collinear, "need more samples (" + std::to_string(design.rows()) +
                                     ") than regressors plus intercept (" + std::to_string(cols) + ")");
  }
  Eigen::HouseholderQR<Matrix> qr(design);
  const Matrix r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  const Vector qty = (qr.householderQ().transpose() * y).head(cols);
  const double scale = r.diagonal().cwiseAbs().maxCoeff();
  for (Index j = 0; j < cols; ++j) {
    if (!(std::abs(r(j, j)) > kCollinearTol * scale)) {
      throw Error(Errc::Collinear, "balance coordinate " + std::to_string(j) +
                                       " is collinear with the preceding ones on these samples");
    }
  }
  Matrix out = Matrix::Zero(cols, cols - 1);
  for (Index k = 1; k < cols; ++k) {
    out.col(k - 1).head(k + 1) =
        r.topLeftCorner(k + 1, k + 1).triangularView<Eigen::Upper>().solve(qty.head(k + 1));
  }
  return out;
}

double sample_sd(const Vector& v) {
  if (v.size() < 2) return 0.0;
  const double m = v.mean();
  return std::sqrt((v.array() - m).square().sum() / static_cast<double>(v.size() - 1));
}

bool is_binary(double v) { return v == 0.0 || v == 1.0; }

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::PLS_PB: return "pls-pb";
    case Method::PCA_PB: return "pca-pb";
    case Method::PLS_RAW: return "pls";
  }
  return "unknown";
}

std::string to_string(Metric metric) { return metric == Metric::RMSEP ? "rmsep" : "me"; }

Method parse_method(const std::string& name) {
  if (name == "pls-pb") return Method::PLS_PB;
  if (name == "pca-pb") return Method::PCA_PB;
  if (name == "pls") return Method::PLS_RAW;
  throw Error(Errc::InvalidArgument, "unknown method '" + name + "' (expected pls-pb, pca-pb or pls)");
}

Metric parse_metric(const std::string& name) {
  if (name == "rmsep") return Metric::RMSEP;
  if (name == "me") return Metric::ME;
  throw Error(Errc::InvalidArgument, "unknown metric '" + name + "' (expected rmsep or me)");
}

Vector BalanceRegression::predict(const CompositionMatrix& x) const {
  if (x.parts() != basis.rows()) throw Error(Errc::DimensionMismatch, "model part count differs from data");
  return ((clr(x).values * basis) * slopes).array() + intercept;
}

BalanceRegression fit_on_balances(const CompositionMatrix& x, const Vector& y,
                                  const BalanceBasis& basis, Index k) {
  if (k < 1 || k > basis.size()) {
    throw Error(Errc::InvalidArgument, "balance count must lie in [1, " + std::to_string(basis.size()) + "]");
  }
  if (y.size() != x.samples()) throw Error(Errc::DimensionMismatch, "response length differs from row count");
  if (x.samples() <= k) {
    throw Error(Errc::Collinear, std::to_string(k) + " balances cannot be fitted on " +
                                     std::to_string(x.samples()) + " samples");
  }
  BalanceRegression model;
  model.basis = basis.coefficients.leftCols(k);
  const Matrix design = design_with_intercept(clr(x).values * model.basis);
  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  qr.setThreshold(kCollinearTol);
  if (qr.rank() < design.cols()) {
    throw Error(Errc::Collinear, "balance coordinates are collinear on these samples");
  }
  const Vector beta = qr.solve(y);
  model.intercept = beta(0);
  model.slopes = beta.tail(k);
  return model;
}

double rmsep(const Vector& y, const Vector& yhat) {
  if (y.size() == 0) throw Error(Errc::EmptyInput, "rmsep of empty vectors");
  if (y.size() != yhat.size()) throw Error(Errc::DimensionMismatch, "rmsep inputs differ in length");
  return std::sqrt((y - yhat).squaredNorm() / static_cast<double>(y.size()));
}

double misclassification_error(std::span<const int> y, std::span<const int> yhat) {
  if (y.empty()) throw Error(Errc::EmptyInput, "misclassification error of empty vectors");
  if (y.size() != yhat.size()) throw Error(Errc::DimensionMismatch, "label vectors differ in length");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if ((y[i] != 0 && y[i] != 1) || (yhat[i] != 0 && yhat[i] != 1)) {
      throw Error(Errc::NonBinary, "labels must be 0 or 1");
    }
    wrong += y[i] != yhat[i];
  }
  return static_cast<double>(wrong) / static_cast<double>(y.size());
}

double misclassification_error(const Vector& y, const Vector& yhat) {
  if (y.size() != yhat.size()) throw Error(Errc::DimensionMismatch, "label vectors differ in length");
  std::vector<int> a(static_cast<std::size_t>(y.size()));
  std::vector<int> b(a.size());
  for (Index i = 0; i < y.size(); ++i) {
    if (!is_binary(y(i)) || !is_binary(yhat(i))) throw Error(Errc::NonBinary, "labels must be 0 or 1");
    a[static_cast<std::size_t>(i)] = static_cast<int>(y(i));
    b[static_cast<std::size_t>(i)] = static_cast<int>(yhat(i));
  }
  return misclassification_error(std::span<const int>(a), std::span<const int>(b));
}

Index one_se_select(const Vector& mean_error, const Vector& sd_error) {
  if (mean_error.size() == 0) throw Error(Errc::EmptyInput, "no error curve to select from");
  if (mean_error.size() != sd_error.size()) throw Error(Errc::DimensionMismatch, "mean and sd lengths differ");
  Index best = 0;
  mean_error.minCoeff(&best);
  const double bound = mean_error(best) + sd_error(best);
  for (Index k = 0; k <= best; ++k) {
    if (mean_error(k) <= bound) return k + 1;
  }
  return best + 1;
}

FoldModel::FoldModel(Method method, const CompositionMatrix& xtrain, const Vector& ytrain, Index max_k)
    : method_(method), max_k_(max_k) {
  if (ytrain.size() != xtrain.samples()) {
    throw Error(Errc::DimensionMismatch, "response length differs from row count");
  }
  if (max_k < 1 || max_k > xtrain.parts() - 1) {
    throw Error(Errc::InvalidArgument, "max_k must lie in [1, D-1]");
  }
  if (method == Method::PLS_RAW) {
    const ClrMatrix raw = clr(xtrain);
    const Vector x_mean = raw.values.colwise().mean().transpose();
    const double y_mean = ytrain.mean();
    const Vector yc = ytrain.array() - y_mean;
    latent_ = pls_fit_upto(center_columns(raw), yc, max_k, x_mean, y_mean);
    return;
  }
  const BalanceBasis basis = method == Method::PLS_PB ? pls_pb(xtrain, ytrain) : pca_pb(xtrain);
  basis_ = basis.coefficients.leftCols(max_k);
  solutions_ = nested_solutions(design_with_intercept(clr(xtrain).values * basis_), ytrain);
}

Matrix FoldModel::predict_all(const CompositionMatrix& xtest) const {
  Matrix out(xtest.samples(), max_k_);
  if (method_ == Method::PLS_RAW) {
    if (xtest.parts() != latent_.weights.rows()) throw Error(Errc::DimensionMismatch, "part count differs");
    Matrix z = clr(xtest).values;
    z.rowwise() -= latent_.x_mean.transpose();
    const Matrix scores = z * latent_.weights;
    Vector acc = Vector::Constant(xtest.samples(), latent_.y_mean);
    for (Index k = 0; k < max_k_; ++k) {
      if (k < latent_.components()) acc += scores.col(k) * latent_.latent_coefficients(k);
      out.col(k) = acc;
    }
    return out;
  }
  if (xtest.parts() != basis_.rows()) throw Error(Errc::DimensionMismatch, "part count differs");
  const Matrix design = design_with_intercept(clr(xtest).values * basis_);
  return design * solutions_;
}

Vector FoldModel::coefficients(Index k) const {
  if (k < 1 || k > max_k_) throw Error(Errc::InvalidArgument, "model size out of range");
  if (method_ == Method::PLS_RAW) {
    Vector out(latent_.weights.rows() + 1);
    const Vector beta = latent_.clr_coefficients(k);
    out(0) = latent_.y_mean - latent_.x_mean.dot(beta);
    out.tail(beta.size()) = beta;
    return out;
  }
  return solutions_.col(k - 1).head(k + 1);
}

std::vector<int> assign_folds(Index n, int folds, Rng& rng) {
  if (folds < 2) throw Error(Errc::InvalidArgument, "at least two folds are required");
  if (n < folds) throw Error(Errc::TooFewSamples, "fewer samples than folds");
  const auto perm = random_permutation(static_cast<std::size_t>(n), rng);
  std::vector<int> fold_of(static_cast<std::size_t>(n));
  const Index base = n / folds;
  const Index extra = n % folds;
  std::size_t pos = 0;
  for (int f = 0; f < folds; ++f) {
    const Index size = base + (f < extra ? 1 : 0);
    for (Index i = 0; i < size; ++i) fold_of[perm[pos++]] = f;
  }
  return fold_of;
}

Index max_supported_k(Index n, Index parts, int folds) {
  const Index largest_fold = (n + folds - 1) / folds;
  const Index smallest_train = n - largest_fold;
  return std::min(parts - 1, smallest_train - 1);
}

Matrix cv_predictions(const CompositionMatrix& x, const Vector& y, Method method, Index max_k,
                      std::span<const int> fold_of) {
  const Index n = x.samples();
  if (static_cast<Index>(fold_of.size()) != n) throw Error(Errc::DimensionMismatch, "fold vector length");
  const int folds = fold_of.empty() ? 0 : *std::max_element(fold_of.begin(), fold_of.end()) + 1;
  Matrix predictions(n, max_k);
  for (int f = 0; f < folds; ++f) {
    std::vector<Index> train;
    std::vector<Index> test;
    for (Index i = 0; i < n; ++i) (fold_of[static_cast<std::size_t>(i)] == f ? test : train).push_back(i);
    if (test.empty()) continue;
    Vector ytrain(static_cast<Index>(train.size()));
    for (std::size_t i = 0; i < train.size(); ++i) ytrain(static_cast<Index>(i)) = y(train[i]);
    const FoldModel model(method, x.select_rows(train), ytrain, max_k);
    const Matrix held_out = model.predict_all(x.select_rows(test));
    for (std::size_t i = 0; i < test.size(); ++i) predictions.row(test[i]) = held_out.row(static_cast<Index>(i));
  }
  return predictions;
}

Vector prediction_errors(const Vector& y, const Matrix& predictions, Metric metric, double threshold) {
  Vector errors(predictions.cols());
  for (Index k = 0; k < predictions.cols(); ++k) {
    if (metric == Metric::RMSEP) {
      errors(k) = rmsep(y, predictions.col(k));
    } else {
      Vector labels(y.size());
      for (Index i = 0; i < y.size(); ++i) labels(i) = predictions(i, k) >= threshold ? 1.0 : 0.0;
      errors(k) = misclassification_error(y, labels);
    }
  }
  return errors;
}

CvResult summarize_errors(const Matrix& per_run, Method method, Metric metric, int folds) {
  CvResult result;
  result.method = method;
  result.metric = metric;
  result.folds = folds;
  result.repeats = static_cast<int>(per_run.rows());
  result.per_repeat = per_run;
  const Index k = per_run.cols();
  result.mean_error.resize(k);
  result.sd_error.resize(k);
  for (Index j = 0; j < k; ++j) {
    result.component_counts.push_back(j + 1);
    result.mean_error(j) = per_run.col(j).mean();
    result.sd_error(j) = sample_sd(per_run.col(j));
  }
  result.selected_k = one_se_select(result.mean_error, result.sd_error);
  return result;
}

CvResult cross_validate(const CompositionMatrix& x, const Vector& y, const CvOptions& options) {
  const Index n = x.samples();
  if (y.size() != n) throw Error(Errc::DimensionMismatch, "response length differs from row count");
  if (options.folds < 2) throw Error(Errc::InvalidArgument, "at least two folds are required");
  if (options.repeats < 1) throw Error(Errc::InvalidArgument, "at least one repeat is required");
  if (n < options.folds) throw Error(Errc::TooFewSamples, "fewer samples than folds");
  if (options.metric == Metric::ME) {
    for (Index i = 0; i < n; ++i) {
      if (!is_binary(y(i))) throw Error(Errc::NonBinary, "misclassification error needs a 0/1 response");
    }
  }
  const Index supported = max_supported_k(n, x.parts(), options.folds);
  if (supported < 1) throw Error(Errc::TooFewSamples, "training folds are too small to fit any model");
  const Index max_k = options.max_k > 0 ? options.max_k : supported;
  if (max_k > supported) {
    throw Error(Errc::TooFewSamples, "max_k " + std::to_string(max_k) + " exceeds the " +
                                         std::to_string(supported) + " balances every training fold supports");
  }

  Matrix per_repeat(options.repeats, max_k);
  parallel_for(
      static_cast<std::size_t>(options.repeats),
      [&](std::size_t r) {
        Rng rng = make_stream(options.seed, r);
        const auto fold_of = assign_folds(n, options.folds, rng);
        const Matrix predictions = cv_predictions(x, y, options.method, max_k, fold_of);
        per_repeat.row(static_cast<Index>(r)) =
            prediction_errors(y, predictions, options.metric, options.threshold).transpose();
      },
      options.threads);
  return summarize_errors(per_repeat, options.method, options.metric, options.folds);
}

}  // namespace plspb
