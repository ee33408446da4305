#include "plspb/latent.hpp"

#include <algorithm>
#include <cmath>

#include "plspb/error.hpp"

namespace plspb {
namespace {

constexpr double kCrossProductTol = 1e-11;
constexpr double kScoreTol = 1e-10;
constexpr double kSingularTol = 1e-10;

void require_centered(const ClrMatrix& xclr) {
  if (!xclr.centered) throw Error(Errc::InvalidArgument, "latent fits expect column-centered clr data");
}

void check_component_count(const ClrMatrix& xclr, Index k) {
  const Index n = xclr.values.rows();
  const Index d = xclr.values.cols();
  const Index limit = std::min(d - 1, n - 1);
  if (k < 1 || k > limit) {
    throw Error(Errc::RankDeficient, "requested " + std::to_string(k) +
                                         " components but at most " + std::to_string(limit) +
                                         " are available");
  }
}

Vector resolve_x_mean(const Vector& x_mean, Index d) {
  if (x_mean.size() == 0) return Vector::Zero(d);
  if (x_mean.size() != d) throw Error(Errc::DimensionMismatch, "x_mean length differs from part count");
  return x_mean;
}

bool is_constant(const Vector& y) {
  if (y.size() == 0) return true;
  const double range = y.maxCoeff() - y.minCoeff();
  return !(range > 1e-12 * std::max(1.0, y.cwiseAbs().maxCoeff()));
}

LatentModel simpls(const ClrMatrix& xclr, const Vector& y, Index k, const Vector& x_mean,
                   double y_mean, bool allow_early_stop) {
  require_centered(xclr);
  const Matrix& x = xclr.values;
  if (y.size() != x.rows()) throw Error(Errc::DimensionMismatch, "response length differs from row count");
  check_component_count(xclr, k);
  if (is_constant(y)) throw Error(Errc::ConstantResponse, "response has zero variance");

  const Index d = x.cols();
  const double x_norm = x.norm();
  Vector cross = x.transpose() * y;
  const double cross0 = cross.norm();
  if (!(cross0 > 0.0)) throw Error(Errc::RankDeficient, "response is orthogonal to every clr column");

  Matrix weights(d, k);
  Matrix scores(x.rows(), k);
  Matrix basis(d, k);  // orthonormalised x-loadings used to deflate the cross product
  Vector q(k);
  Index fitted = 0;
  for (Index a = 0; a < k; ++a) {
    if (a > 0 && cross.norm() <= kCrossProductTol * cross0) break;
    Vector r = cross;
    Vector t = x * r;
    const double t_norm = t.norm();
    if (!(t_norm > kScoreTol * x_norm * r.norm())) break;
    t /= t_norm;
    r /= t_norm;
    Vector p = x.transpose() * t;
    Vector v = p;
    if (a > 0) v -= basis.leftCols(a) * (basis.leftCols(a).transpose() * p);
    // Second pass keeps the deflation basis orthonormal at large k.
    if (a > 0) v -= basis.leftCols(a) * (basis.leftCols(a).transpose() * v);
    v /= v.norm();
    cross -= v * v.dot(cross);

    weights.col(a) = r;
    scores.col(a) = t;
    basis.col(a) = v;
    q(a) = y.dot(t);
    ++fitted;
  }
  if (fitted < k && !allow_early_stop) {
    throw Error(Errc::RankDeficient, "only " + std::to_string(fitted) +
                                         " components are supported by the data, " +
                                         std::to_string(k) + " requested");
  }

  LatentModel model;
  model.kind = LatentKind::PLS;
  model.weights = weights.leftCols(fitted);
  model.scores = scores.leftCols(fitted);
  model.latent_coefficients = q.head(fitted);
  const Vector signs = canonical_signs(model.weights);
  for (Index a = 0; a < fitted; ++a) {
    model.scores.col(a) *= signs(a);
    model.latent_coefficients(a) *= signs(a);
  }
  model.x_mean = resolve_x_mean(x_mean, d);
  model.y_mean = y_mean;
  model.part_names = xclr.part_names;
  return model;
}

Matrix centered_clr_rows(const LatentModel& model, const CompositionMatrix& xnew) {
  if (xnew.parts() != model.weights.rows()) {
    throw Error(Errc::DimensionMismatch, "model expects " + std::to_string(model.weights.rows()) +
                                             " parts, got " + std::to_string(xnew.parts()));
  }
  Matrix z = clr(xnew).values;
  z.rowwise() -= model.x_mean.transpose();
  return z;
}

}  // namespace

Vector canonical_signs(Matrix& columns) {
  Vector signs = Vector::Ones(columns.cols());
  for (Index a = 0; a < columns.cols(); ++a) {
    // Entries tied in magnitude up to rounding (e.g. a two-part contrast
    // (1, -1)/sqrt(2)) resolve to the lowest index, so the choice does not
    // depend on the last bits of an SVD.
    const double top = columns.col(a).cwiseAbs().maxCoeff();
    Index arg = 0;
    while (std::abs(columns(arg, a)) < top * (1.0 - 1e-10)) ++arg;
    if (columns(arg, a) < 0.0) {
      columns.col(a) *= -1.0;
      signs(a) = -1.0;
    }
  }
  return signs;
}

Vector LatentModel::clr_coefficients(Index k) const {
  if (latent_coefficients.size() == 0) {
    throw Error(Errc::InvalidArgument, "model carries no latent regression coefficients");
  }
  const Index use = (k <= 0) ? components() : std::min(k, components());
  return weights.leftCols(use) * latent_coefficients.head(use);
}

LatentModel pls_fit(const ClrMatrix& xclr, const Vector& y, Index k, const Vector& x_mean,
                    double y_mean) {
  return simpls(xclr, y, k, x_mean, y_mean, false);
}

LatentModel pls_fit_upto(const ClrMatrix& xclr, const Vector& y, Index k, const Vector& x_mean,
                         double y_mean) {
  return simpls(xclr, y, k, x_mean, y_mean, true);
}

LatentModel pls_fit(const CompositionMatrix& x, const Vector& y, Index k) {
  if (y.size() != x.samples()) throw Error(Errc::DimensionMismatch, "response length differs from row count");
  const ClrMatrix raw = clr(x);
  const Vector x_mean = raw.values.colwise().mean().transpose();
  const double y_mean = y.mean();
  const Vector yc = y.array() - y_mean;
  return pls_fit(center_columns(raw), yc, k, x_mean, y_mean);
}

LatentModel pca_fit(const ClrMatrix& xclr, Index k, const Vector& x_mean) {
  require_centered(xclr);
  check_component_count(xclr, k);
  const Matrix& x = xclr.values;
  Eigen::BDCSVD<Matrix> svd(x, Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double largest = sv.size() > 0 ? sv(0) : 0.0;
  Index rank = 0;
  while (rank < sv.size() && sv(rank) > kSingularTol * largest) ++rank;
  if (k > rank) {
    throw Error(Errc::RankDeficient, "requested " + std::to_string(k) +
                                         " components but the clr data has rank " +
                                         std::to_string(rank));
  }
  LatentModel model;
  model.kind = LatentKind::PCA;
  model.weights = svd.matrixV().leftCols(k);
  canonical_signs(model.weights);
  model.scores = x * model.weights;
  const double dof = static_cast<double>(std::max<Index>(x.rows() - 1, 1));
  model.explained_variance = sv.head(k).array().square() / dof;
  model.x_mean = resolve_x_mean(x_mean, x.cols());
  model.part_names = xclr.part_names;
  return model;
}

Vector pls_predict(const LatentModel& model, const CompositionMatrix& xnew, Index k) {
  const Matrix z = centered_clr_rows(model, xnew);
  return (z * model.clr_coefficients(k)).array() + model.y_mean;
}

std::vector<int> threshold_scores(const Vector& scores, double threshold) {
  std::vector<int> labels(static_cast<std::size_t>(scores.size()));
  for (Index i = 0; i < scores.size(); ++i) labels[static_cast<std::size_t>(i)] = scores(i) >= threshold ? 1 : 0;
  return labels;
}

std::vector<int> classify(const LatentModel& model, const CompositionMatrix& xnew, double threshold,
                          Index k) {
  return threshold_scores(pls_predict(model, xnew, k), threshold);
}

}  // namespace plspb
