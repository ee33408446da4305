#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace plspb {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Tolerances shared by validation code and tests.
inline constexpr double kOrthonormalTol = 1e-10;
inline constexpr double kIdentityTol = 1e-12;
inline constexpr double kRoundTripTol = 1e-9;

/// n x D table of strictly positive parts. Only ratios between entries of a
/// row are meaningful; the constructor rejects zeros, negatives and NaNs.
class CompositionMatrix {
 public:
  /// Empty names are replaced by V1..VD.
  explicit CompositionMatrix(Matrix values, std::vector<std::string> part_names = {});

  const Matrix& values() const noexcept { return values_; }
  const std::vector<std::string>& part_names() const noexcept { return part_names_; }
  Index samples() const noexcept { return values_.rows(); }
  Index parts() const noexcept { return values_.cols(); }

  CompositionMatrix select_rows(std::span<const Index> rows) const;
  /// Subcomposition on the given parts (in the given order).
  CompositionMatrix select_parts(std::span<const Index> parts) const;

  /// Elementwise natural log.
  Matrix log_values() const;

 private:
  Matrix values_;
  std::vector<std::string> part_names_;
};

/// clr coefficients: every row sums to zero. `centered` records whether the
/// column means were removed as well.
struct ClrMatrix {
  Matrix values;
  bool centered = false;
  std::vector<std::string> part_names;
};

/// Codes in {-1, 0, +1} with at least one of each nonzero sign.
class SignVector {
 public:
  explicit SignVector(std::vector<std::int8_t> signs);

  const std::vector<std::int8_t>& signs() const noexcept { return signs_; }
  Index size() const noexcept { return static_cast<Index>(signs_.size()); }
  int positives() const noexcept { return positives_; }
  int negatives() const noexcept { return negatives_; }
  int support() const noexcept { return positives_ + negatives_; }
  std::int8_t operator[](Index i) const { return signs_[static_cast<std::size_t>(i)]; }

  bool operator==(const SignVector& other) const { return signs_ == other.signs_; }

 private:
  std::vector<std::int8_t> signs_;
  int positives_ = 0;
  int negatives_ = 0;
};

/// Logcontrast weights of a balance between r numerator and s denominator parts.
struct BalanceCoefficients {
  Vector coeffs;
  int numerator_count = 0;
  int denominator_count = 0;
};

CompositionMatrix closure(const Matrix& raw, double total = 1.0,
                          std::vector<std::string> part_names = {});

ClrMatrix clr(const CompositionMatrix& x);

ClrMatrix center_columns(const ClrMatrix& m);

BalanceCoefficients signs_to_coefficients(const SignVector& s);

/// ln(X) * b. Equal to clr(X) * b whenever b sums to zero.
Vector balance_values(const CompositionMatrix& x, const BalanceCoefficients& b);
Vector balance_values(const CompositionMatrix& x, const Vector& coeffs);

/// Orthonormal D x (D-1) basis whose column j contrasts part j against parts j+1..D.
Matrix pivot_basis(Index parts);

Matrix pivot_coordinates(const CompositionMatrix& x);

CompositionMatrix inverse_pivot(const Matrix& z, double total = 1.0,
                                std::vector<std::string> part_names = {});

/// Inverse of clr up to closure: rows of exp(values) rescaled to `total`.
CompositionMatrix clr_inverse(const Matrix& clr_values, double total = 1.0,
                              std::vector<std::string> part_names = {});

std::vector<std::string> default_part_names(Index parts);

}  // namespace plspb
