#include "plspb/pb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "plspb/error.hpp"
#include "plspb/latent.hpp"

namespace plspb {
namespace {

constexpr double kTieTol = 1e-12;
constexpr double kDegenerateTol = 1e-12;

// Centered clr of the subcomposition on `parts`.
Matrix centered_sub_clr(const Matrix& logs, const std::vector<Index>& parts) {
  Matrix sub(logs.rows(), static_cast<Index>(parts.size()));
  for (std::size_t j = 0; j < parts.size(); ++j) sub.col(static_cast<Index>(j)) = logs.col(parts[j]);
  const Vector row_means = sub.rowwise().mean();
  sub.colwise() -= row_means;
  const Eigen::RowVectorXd col_means = sub.colwise().mean();
  sub.rowwise() -= col_means;
  return sub;
}

double dof(Index n) { return static_cast<double>(std::max<Index>(n - 1, 1)); }

bool beats(double score, int support, double best_score, int best_support) {
  const double scale = std::max(1.0, std::abs(best_score));
  if (score > best_score + kTieTol * scale) return true;
  if (score < best_score - kTieTol * scale) return false;
  return support < best_support;
}

template <typename ScoreFn>
BalanceChoice select(const std::vector<SignVector>& candidates, Index parts, ScoreFn&& score_of) {
  if (candidates.empty()) throw Error(Errc::InvalidArgument, "candidate list is empty");
  BalanceChoice best;
  int best_support = 0;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (candidates[c].size() != parts) {
      throw Error(Errc::DimensionMismatch, "candidate length differs from part count");
    }
    BalanceCoefficients b = signs_to_coefficients(candidates[c]);
    const double score = score_of(b.coeffs);
    if (c == 0 || beats(score, candidates[c].support(), best.score, best_support)) {
      best.balance = std::move(b);
      best.candidate = static_cast<Index>(c);
      best.score = score;
      best_support = candidates[c].support();
    }
  }
  return best;
}

std::vector<SignVector> candidates_with_fallback(const Vector& loading) {
  try {
    return candidate_signs(loading);
  } catch (const Error& e) {
    if (e.code() != Errc::OneSidedLoading) throw;
  }
  const Vector spread = loading.array() - loading.mean();
  try {
    return candidate_signs(spread);
  } catch (const Error& e) {
    if (e.code() != Errc::OneSidedLoading) throw;
  }
  // Constant loading: any split is as good as another, pair parts by position.
  const Index d = loading.size();
  Vector ordinal(d);
  for (Index i = 0; i < d; ++i) ordinal(i) = 0.5 * static_cast<double>(d - 1) - static_cast<double>(i);
  return candidate_signs(ordinal);
}

struct Column {
  Vector coeffs;
  Eigen::VectorXi signs;
  double score = 0.0;
};

class PartitionBuilder {
 public:
  PartitionBuilder(const CompositionMatrix& x, const Vector* y, BasisCriterion criterion)
      : logs_(x.log_values()), criterion_(criterion) {
    if (y != nullptr) yc_ = y->array() - y->mean();
  }

  int build(std::vector<Index> parts) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    nodes_[static_cast<std::size_t>(id)].parts = parts;
    if (parts.size() < 2) return id;

    const Matrix sub = centered_sub_clr(logs_, parts);
    const Vector loading = node_loading(sub);
    const std::vector<SignVector> candidates = candidates_with_fallback(loading);
    const BalanceChoice choice = criterion_ == BasisCriterion::Covariance
                                     ? select(candidates, sub.cols(), [&](const Vector& b) {
                                         return covariance_score(sub, b);
                                       })
                                     : select(candidates, sub.cols(), [&](const Vector& b) {
                                         return variance_score(sub, b);
                                       });
    const SignVector& chosen = candidates[static_cast<std::size_t>(choice.candidate)];

    std::vector<Index> numerator, denominator, zero;
    for (Index j = 0; j < chosen.size(); ++j) {
      const Index part = parts[static_cast<std::size_t>(j)];
      if (chosen[j] == 1) {
        numerator.push_back(part);
      } else if (chosen[j] == -1) {
        denominator.push_back(part);
      } else {
        zero.push_back(part);
      }
    }
    const Index balance_column = add_column(numerator, denominator);

    int zero_child = -1;
    Index completion_column = -1;
    if (!zero.empty()) {
      zero_child = build(zero);
      std::vector<Index> used = numerator;
      used.insert(used.end(), denominator.begin(), denominator.end());
      completion_column = add_column(zero, used);
    }
    const int numerator_child = build(numerator);
    const int denominator_child = build(denominator);

    PartitionNode& node = nodes_[static_cast<std::size_t>(id)];
    node.numerator = std::move(numerator);
    node.denominator = std::move(denominator);
    node.zero = std::move(zero);
    node.balance_column = balance_column;
    node.completion_column = completion_column;
    node.zero_child = zero_child;
    node.numerator_child = numerator_child;
    node.denominator_child = denominator_child;
    return id;
  }

  BalanceBasis finish(std::vector<std::string> part_names) {
    const Index d = logs_.cols();
    const Index k = static_cast<Index>(columns_.size());
    std::vector<Index> order(columns_.size());
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
      return columns_[static_cast<std::size_t>(a)].score > columns_[static_cast<std::size_t>(b)].score;
    });
    std::vector<Index> rank(columns_.size());
    BalanceBasis basis;
    basis.coefficients.resize(d, k);
    basis.signs.resize(d, k);
    basis.scores.resize(k);
    for (Index pos = 0; pos < k; ++pos) {
      const Column& col = columns_[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])];
      basis.coefficients.col(pos) = col.coeffs;
      basis.signs.col(pos) = col.signs;
      basis.scores(pos) = col.score;
      rank[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])] = pos;
    }
    for (PartitionNode& node : nodes_) {
      if (node.balance_column >= 0) node.balance_column = rank[static_cast<std::size_t>(node.balance_column)];
      if (node.completion_column >= 0) {
        node.completion_column = rank[static_cast<std::size_t>(node.completion_column)];
      }
    }
    basis.criterion = criterion_;
    basis.part_names = std::move(part_names);
    basis.tree = std::move(nodes_);
    return basis;
  }

 private:
  Vector node_loading(const Matrix& sub) const {
    const double sub_norm = sub.norm();
    if (criterion_ == BasisCriterion::Covariance) {
      Vector g = sub.transpose() * yc_;
      if (g.norm() > kDegenerateTol * sub_norm * yc_.norm()) return g / g.norm();
    }
    // Unsupervised direction, also used when y carries no signal on this subset.
    if (!(sub_norm > kDegenerateTol * std::max(1.0, logs_.cwiseAbs().maxCoeff()))) {
      return Vector::Zero(sub.cols());
    }
    Eigen::BDCSVD<Matrix> svd(sub, Eigen::ComputeThinV);
    Matrix first = svd.matrixV().leftCols(1);
    canonical_signs(first);
    return first.col(0);
  }

  double covariance_score(const Matrix& sub, const Vector& b) const {
    return std::abs((sub * b).dot(yc_)) / dof(sub.rows());
  }

  double variance_score(const Matrix& sub, const Vector& b) const {
    return (sub * b).squaredNorm() / dof(sub.rows());
  }

  Index add_column(const std::vector<Index>& numerator, const std::vector<Index>& denominator) {
    const Index d = logs_.cols();
    std::vector<std::int8_t> codes(static_cast<std::size_t>(d), 0);
    for (Index p : numerator) codes[static_cast<std::size_t>(p)] = 1;
    for (Index p : denominator) codes[static_cast<std::size_t>(p)] = -1;
    const SignVector signs(std::move(codes));
    Column col;
    col.coeffs = signs_to_coefficients(signs).coeffs;
    col.signs.resize(d);
    for (Index i = 0; i < d; ++i) col.signs(i) = signs[i];
    // Scores on the full composition: centering the clr columns leaves b'(.) unchanged.
    Vector values = logs_ * col.coeffs;
    values.array() -= values.mean();
    col.score = criterion_ == BasisCriterion::Covariance
                    ? std::abs(values.dot(yc_)) / dof(logs_.rows())
                    : values.squaredNorm() / dof(logs_.rows());
    columns_.push_back(std::move(col));
    return static_cast<Index>(columns_.size()) - 1;
  }

  Matrix logs_;
  Vector yc_;
  BasisCriterion criterion_;
  std::vector<Column> columns_;
  std::vector<PartitionNode> nodes_;
};

void check_samples(const CompositionMatrix& x) {
  if (x.samples() < 3) throw Error(Errc::TooFewSamples, "principal balances need at least 3 samples");
}

std::vector<Index> all_parts(Index d) {
  std::vector<Index> parts(static_cast<std::size_t>(d));
  std::iota(parts.begin(), parts.end(), Index{0});
  return parts;
}

}  // namespace

std::string to_string(BasisCriterion criterion) {
  return criterion == BasisCriterion::Covariance ? "abs_cov" : "variance";
}

BalanceCoefficients BalanceBasis::balance(Index k) const {
  return signs_to_coefficients(sign_vector(k));
}

SignVector BalanceBasis::sign_vector(Index k) const {
  std::vector<std::int8_t> codes(static_cast<std::size_t>(signs.rows()));
  for (Index i = 0; i < signs.rows(); ++i) codes[static_cast<std::size_t>(i)] = static_cast<std::int8_t>(signs(i, k));
  return SignVector(std::move(codes));
}

std::vector<SignVector> candidate_signs(const Vector& p) {
  const Index d = p.size();
  if (d < 2) throw Error(Errc::InvalidArgument, "candidate signs need at least two entries");
  Index top = 0;
  Index bottom = 0;
  p.maxCoeff(&top);
  p.minCoeff(&bottom);
  if (!(p(top) > 0.0) || !(p(bottom) < 0.0)) {
    throw Error(Errc::OneSidedLoading, "loading vector has entries of only one sign");
  }
  std::vector<Index> rest;
  rest.reserve(static_cast<std::size_t>(d - 2));
  for (Index i = 0; i < d; ++i) {
    if (i != top && i != bottom) rest.push_back(i);
  }
  std::stable_sort(rest.begin(), rest.end(),
                   [&](Index a, Index b) { return std::abs(p(a)) > std::abs(p(b)); });

  std::vector<std::int8_t> codes(static_cast<std::size_t>(d), 0);
  codes[static_cast<std::size_t>(top)] = 1;
  codes[static_cast<std::size_t>(bottom)] = -1;
  std::vector<SignVector> out;
  out.reserve(static_cast<std::size_t>(d - 1));
  out.emplace_back(codes);
  for (Index i : rest) {
    codes[static_cast<std::size_t>(i)] = p(i) < 0.0 ? -1 : 1;
    out.emplace_back(codes);
  }
  return out;
}

BalanceChoice best_balance(const CompositionMatrix& xsub, const Vector& y,
                           const std::vector<SignVector>& candidates) {
  if (y.size() != xsub.samples()) throw Error(Errc::DimensionMismatch, "response length differs from row count");
  Matrix logs = xsub.log_values();
  const Eigen::RowVectorXd means = logs.colwise().mean();
  logs.rowwise() -= means;
  const Vector yc = y.array() - y.mean();
  const double denom = dof(xsub.samples());
  return select(candidates, xsub.parts(),
                [&](const Vector& b) { return std::abs((logs * b).dot(yc)) / denom; });
}

BalanceChoice best_balance_variance(const CompositionMatrix& xsub,
                                    const std::vector<SignVector>& candidates) {
  Matrix logs = xsub.log_values();
  const Eigen::RowVectorXd means = logs.colwise().mean();
  logs.rowwise() -= means;
  const double denom = dof(xsub.samples());
  return select(candidates, xsub.parts(),
                [&](const Vector& b) { return (logs * b).squaredNorm() / denom; });
}

BalanceBasis pls_pb(const CompositionMatrix& x, const Vector& y) {
  check_samples(x);
  if (y.size() != x.samples()) throw Error(Errc::DimensionMismatch, "response length differs from row count");
  const double range = y.maxCoeff() - y.minCoeff();
  if (!(range > 1e-12 * std::max(1.0, y.cwiseAbs().maxCoeff()))) {
    throw Error(Errc::ConstantResponse, "response has zero variance");
  }
  PartitionBuilder builder(x, &y, BasisCriterion::Covariance);
  builder.build(all_parts(x.parts()));
  return builder.finish(x.part_names());
}

BalanceBasis pca_pb(const CompositionMatrix& x) {
  check_samples(x);
  PartitionBuilder builder(x, nullptr, BasisCriterion::Variance);
  builder.build(all_parts(x.parts()));
  return builder.finish(x.part_names());
}

Matrix balance_coordinates(const CompositionMatrix& x, const BalanceBasis& basis, Index k) {
  if (x.parts() != basis.parts()) throw Error(Errc::DimensionMismatch, "basis part count differs from data");
  const Index use = (k <= 0) ? basis.size() : std::min(k, basis.size());
  return clr(x).values * basis.coefficients.leftCols(use);
}

BasisCheck verify_basis(const BalanceBasis& basis) {
  BasisCheck check;
  const Matrix& b = basis.coefficients;
  const Index k = b.cols();
  const Index d = b.rows();
  check.orthonormality_error =
      k > 0 ? (b.transpose() * b - Matrix::Identity(k, k)).cwiseAbs().maxCoeff() : 0.0;
  check.zero_sum_error = k > 0 ? b.colwise().sum().cwiseAbs().maxCoeff() : 0.0;
  for (Index c = 0; c < k; ++c) {
    int r = 0;
    int s = 0;
    for (Index i = 0; i < d; ++i) {
      r += basis.signs(i, c) == 1;
      s += basis.signs(i, c) == -1;
    }
    if (r == 0 || s == 0) {
      check.coefficient_error = std::numeric_limits<double>::infinity();
      continue;
    }
    const double pos = std::sqrt(static_cast<double>(s) / ((r + s) * static_cast<double>(r)));
    const double neg = -std::sqrt(static_cast<double>(r) / ((r + s) * static_cast<double>(s)));
    for (Index i = 0; i < d; ++i) {
      const int code = basis.signs(i, c);
      const double expected = code == 1 ? pos : (code == -1 ? neg : 0.0);
      check.coefficient_error = std::max(check.coefficient_error, std::abs(b(i, c) - expected));
    }
  }
  for (Index a = 0; a < k && check.nested; ++a) {
    for (Index c = a + 1; c < k && check.nested; ++c) {
      bool a_in_c = true;  // support(a) subset of support(c)
      bool c_in_a = true;
      bool overlap = false;
      for (Index i = 0; i < d; ++i) {
        const bool in_a = basis.signs(i, a) != 0;
        const bool in_c = basis.signs(i, c) != 0;
        overlap = overlap || (in_a && in_c);
        a_in_c = a_in_c && (!in_a || in_c);
        c_in_a = c_in_a && (!in_c || in_a);
      }
      if (!overlap) continue;
      if (!a_in_c && !c_in_a) {
        check.nested = false;
        break;
      }
      const Index inner = a_in_c ? a : c;
      const Index outer = a_in_c ? c : a;
      int side = 0;
      for (Index i = 0; i < d; ++i) {
        if (basis.signs(i, inner) == 0) continue;
        const int code = basis.signs(i, outer);
        if (side == 0) side = code;
        if (code != side) {
          check.nested = false;
          break;
        }
      }
    }
  }
  for (Index c = 1; c < basis.scores.size(); ++c) {
    if (basis.scores(c) > basis.scores(c - 1)) check.sorted = false;
  }
  return check;
}

}  // namespace plspb
