#include "plspb/coda.hpp"

#include <cmath>
#include <utility>

#include "plspb/error.hpp"

namespace plspb {

std::vector<std::string> default_part_names(Index parts) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(parts));
  for (Index j = 0; j < parts; ++j) names.push_back("V" + std::to_string(j + 1));
  return names;
}

CompositionMatrix::CompositionMatrix(Matrix values, std::vector<std::string> part_names)
    : values_(std::move(values)), part_names_(std::move(part_names)) {
  if (values_.rows() < 1 || values_.cols() < 2) {
    throw Error(Errc::InvalidArgument, "a composition needs at least one row and two parts");
  }
  for (Index i = 0; i < values_.rows(); ++i) {
    for (Index j = 0; j < values_.cols(); ++j) {
      const double v = values_(i, j);
      if (v == 0.0) {
        throw Error(Errc::ZeroPart, "zero entry at row " + std::to_string(i + 1) + ", part " +
                                        std::to_string(j + 1));
      }
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw Error(Errc::InvalidArgument, "non-positive or non-finite entry at row " +
                                               std::to_string(i + 1) + ", part " +
                                               std::to_string(j + 1));
      }
    }
  }
  if (part_names_.empty()) {
    part_names_ = default_part_names(values_.cols());
  } else if (static_cast<Index>(part_names_.size()) != values_.cols()) {
    throw Error(Errc::DimensionMismatch, "part name count does not match column count");
  }
}

CompositionMatrix CompositionMatrix::select_rows(std::span<const Index> rows) const {
  Matrix out(static_cast<Index>(rows.size()), values_.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = values_.row(rows[i]);
  return CompositionMatrix(std::move(out), part_names_);
}

CompositionMatrix CompositionMatrix::select_parts(std::span<const Index> parts) const {
  Matrix out(values_.rows(), static_cast<Index>(parts.size()));
  std::vector<std::string> names;
  names.reserve(parts.size());
  for (std::size_t j = 0; j < parts.size(); ++j) {
    out.col(static_cast<Index>(j)) = values_.col(parts[j]);
    names.push_back(part_names_[static_cast<std::size_t>(parts[j])]);
  }
  return CompositionMatrix(std::move(out), std::move(names));
}

Matrix CompositionMatrix::log_values() const { return values_.array().log().matrix(); }

SignVector::SignVector(std::vector<std::int8_t> signs) : signs_(std::move(signs)) {
  for (auto s : signs_) {
    if (s == 1) {
      ++positives_;
    } else if (s == -1) {
      ++negatives_;
    } else if (s != 0) {
      throw Error(Errc::InvalidArgument, "sign codes must be -1, 0 or +1");
    }
  }
  if (positives_ == 0 || negatives_ == 0) {
    throw Error(Errc::DegenerateSplit, "a balance needs at least one +1 and one -1");
  }
}

CompositionMatrix closure(const Matrix& raw, double total, std::vector<std::string> part_names) {
  if (!(total > 0.0)) throw Error(Errc::InvalidArgument, "closure total must be positive");
  if (raw.rows() < 1 || raw.cols() < 2) {
    throw Error(Errc::InvalidArgument, "a composition needs at least one row and two parts");
  }
  if ((raw.array() < 0.0).any()) throw Error(Errc::InvalidArgument, "negative entry in raw data");
  for (Index i = 0; i < raw.rows(); ++i) {
    for (Index j = 0; j < raw.cols(); ++j) {
      if (raw(i, j) == 0.0) {
        throw Error(Errc::ZeroPart, "zero entry at row " + std::to_string(i + 1) + ", part " +
                                        std::to_string(j + 1) + "; replace zeros before closing");
      }
    }
  }
  Matrix closed = raw;
  for (Index i = 0; i < closed.rows(); ++i) closed.row(i) *= total / closed.row(i).sum();
  return CompositionMatrix(std::move(closed), std::move(part_names));
}

ClrMatrix clr(const CompositionMatrix& x) {
  Matrix logs = x.log_values();
  // exp(mean log) is the geometric mean; subtracting the mean log avoids forming it.
  const Vector row_means = logs.rowwise().mean();
  logs.colwise() -= row_means;
  return ClrMatrix{std::move(logs), false, x.part_names()};
}

ClrMatrix center_columns(const ClrMatrix& m) {
  ClrMatrix out = m;
  if (out.values.rows() > 0) {
    const Eigen::RowVectorXd means = out.values.colwise().mean();
    out.values.rowwise() -= means;
  }
  out.centered = true;
  return out;
}

BalanceCoefficients signs_to_coefficients(const SignVector& s) {
  const double r = s.positives();
  const double q = s.negatives();
  const double pos = std::sqrt(q / ((r + q) * r));
  const double neg = -std::sqrt(r / ((r + q) * q));
  BalanceCoefficients b;
  b.coeffs = Vector::Zero(s.size());
  for (Index i = 0; i < s.size(); ++i) {
    if (s[i] == 1) {
      b.coeffs(i) = pos;
    } else if (s[i] == -1) {
      b.coeffs(i) = neg;
    }
  }
  b.numerator_count = s.positives();
  b.denominator_count = s.negatives();
  return b;
}

Vector balance_values(const CompositionMatrix& x, const Vector& coeffs) {
  if (coeffs.size() != x.parts()) {
    throw Error(Errc::DimensionMismatch, "coefficient length differs from part count");
  }
  return x.log_values() * coeffs;
}

Vector balance_values(const CompositionMatrix& x, const BalanceCoefficients& b) {
  return balance_values(x, b.coeffs);
}

Matrix pivot_basis(Index parts) {
  if (parts < 2) throw Error(Errc::InvalidArgument, "pivot basis needs at least two parts");
  Matrix v = Matrix::Zero(parts, parts - 1);
  for (Index j = 0; j < parts - 1; ++j) {
    const double rest = static_cast<double>(parts - j - 1);
    v(j, j) = std::sqrt(rest / (rest + 1.0));
    const double tail = -1.0 / std::sqrt(rest * (rest + 1.0));
    for (Index k = j + 1; k < parts; ++k) v(k, j) = tail;
  }
  return v;
}

Matrix pivot_coordinates(const CompositionMatrix& x) {
  const Matrix logs = x.log_values();
  const Index n = logs.rows();
  const Index d = logs.cols();
  Matrix z(n, d - 1);
  for (Index i = 0; i < n; ++i) {
    // Suffix sums give the log geometric mean of parts j+1..D in O(D).
    double suffix = logs(i, d - 1);
    for (Index j = d - 2; j >= 0; --j) {
      const double rest = static_cast<double>(d - j - 1);
      z(i, j) = std::sqrt(rest / (rest + 1.0)) * (logs(i, j) - suffix / rest);
      suffix += logs(i, j);
    }
  }
  return z;
}

CompositionMatrix clr_inverse(const Matrix& clr_values, double total,
                              std::vector<std::string> part_names) {
  Matrix shifted = clr_values;
  const Vector row_max = shifted.rowwise().maxCoeff();
  shifted.colwise() -= row_max;
  Matrix raw = shifted.array().exp().matrix();
  for (Index i = 0; i < raw.rows(); ++i) raw.row(i) *= total / raw.row(i).sum();
  return CompositionMatrix(std::move(raw), std::move(part_names));
}

CompositionMatrix inverse_pivot(const Matrix& z, double total, std::vector<std::string> part_names) {
  if (z.cols() < 1) throw Error(Errc::InvalidArgument, "pivot matrix needs at least one column");
  const Matrix basis = pivot_basis(z.cols() + 1);
  return clr_inverse(z * basis.transpose(), total, std::move(part_names));
}

}  // namespace plspb
