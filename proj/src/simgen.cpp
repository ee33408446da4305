#include "plspb/simgen.hpp"

#include <cmath>
#include <numeric>
#include <random>

#include "plspb/error.hpp"

namespace plspb {
namespace {

// Sub-stream ids so each ingredient of a dataset has its own generator.
constexpr std::uint64_t kBetaStream = 1;
constexpr std::uint64_t kMarkerStream = 2;
constexpr std::uint64_t kNoiseCoordStream = 3;
constexpr std::uint64_t kEpsilonStream = 4;

double alternating(Index i, Index j) { return ((i + j) % 2 == 0) ? 1.0 : -1.0; }

Matrix unchecked_sigma(const SimScenario& s) {
  const Index dim = s.parts - 1;
  Matrix sigma = Matrix::Identity(dim, dim);
  Index start = 0;
  for (std::size_t b = 0; b < s.block_sizes.size(); ++b) {
    const Index width = s.block_sizes[b];
    double strength = 1.0;
    if (s.sim_case == SimCase::SameSizedBlocks && !s.block_strengths.empty()) {
      strength = s.block_strengths[b % s.block_strengths.size()];
    }
    for (Index i = start; i < start + width; ++i) {
      for (Index j = start; j < start + width; ++j) {
        if (i == j) {
          sigma(i, j) = s.block_diagonal;
          continue;
        }
        // 1-based indices in the sign; blocks start at even offsets in the defaults.
        double value = s.off_diagonal * alternating(i + 1, j + 1);
        if (s.sim_case == SimCase::SameSizedBlocks) {
          const double lag = static_cast<double>(std::abs(i - j));
          value *= strength * (1.0 - lag / static_cast<double>(width));
        }
        sigma(i, j) = value;
      }
    }
    start += width;
  }
  return sigma;
}

}  // namespace

std::string to_string(SimCase c) {
  switch (c) {
    case SimCase::OneBlock: return "one-block";
    case SimCase::SameSizedBlocks: return "same-blocks";
    case SimCase::DifferentSizedBlocks: return "different-blocks";
  }
  return "unknown";
}

SimCase parse_sim_case(const std::string& name) {
  if (name == "one-block") return SimCase::OneBlock;
  if (name == "same-blocks") return SimCase::SameSizedBlocks;
  if (name == "different-blocks") return SimCase::DifferentSizedBlocks;
  throw Error(Errc::InvalidArgument,
              "unknown case '" + name + "' (expected one-block, same-blocks or different-blocks)");
}

SimScenario SimScenario::defaults(SimCase c) {
  SimScenario s;
  s.sim_case = c;
  switch (c) {
    case SimCase::OneBlock: s.block_sizes = {20}; break;
    case SimCase::SameSizedBlocks: s.block_sizes = {20, 20, 20, 20}; break;
    case SimCase::DifferentSizedBlocks: s.block_sizes = {30, 10, 30, 10}; break;
  }
  return s;
}

Index SimScenario::marker_coordinates() const {
  return std::accumulate(block_sizes.begin(), block_sizes.end(), Index{0});
}

void SimScenario::validate() const {
  if (n < 2) throw Error(Errc::InvalidArgument, "need at least two samples");
  if (parts < 3) throw Error(Errc::InvalidArgument, "need at least three parts");
  if (block_sizes.empty()) throw Error(Errc::InvalidArgument, "need at least one marker block");
  for (Index b : block_sizes) {
    if (b < 1) throw Error(Errc::InvalidArgument, "marker blocks must be non-empty");
  }
  if (sim_case == SimCase::OneBlock && block_sizes.size() != 1) {
    throw Error(Errc::InvalidArgument, "the one-block case takes exactly one block");
  }
  if (marker_coordinates() >= parts - 1) {
    throw Error(Errc::InvalidArgument, "marker blocks must leave room for noise coordinates (sum < D - 1)");
  }
  if (!(noise_sd >= 0.0)) throw Error(Errc::InvalidArgument, "noise_sd must be non-negative");
  if (!(block_diagonal > 0.0)) throw Error(Errc::InvalidArgument, "block diagonal must be positive");
}

Sigma build_sigma_checked(const SimScenario& scenario) {
  scenario.validate();
  Sigma out;
  out.matrix = unchecked_sigma(scenario);
  Eigen::LLT<Matrix> llt(out.matrix);
  if (llt.info() == Eigen::Success) return out;
  if (!scenario.allow_shrink) {
    throw Error(Errc::NotPositiveDefinite, "covariance design is not positive definite");
  }
  // sigma = diag + off; with M = diag^-1/2 off diag^-1/2, diag + a*off is PD iff 1 + a*lmin(M) > 0.
  const Vector diag = out.matrix.diagonal();
  Matrix off = out.matrix;
  off.diagonal().setZero();
  const Vector inv_sqrt = diag.array().rsqrt();
  const Matrix scaled = inv_sqrt.asDiagonal() * off * inv_sqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(scaled, Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues().minCoeff();
  out.shrink_factor = 0.999 / (-lmin);
  out.matrix = Matrix(diag.asDiagonal()) + out.shrink_factor * off;
  return out;
}

Matrix build_sigma(const SimScenario& scenario) { return build_sigma_checked(scenario).matrix; }

Matrix mvn_sample(const Matrix& sigma, Index n, Rng& rng) {
  if (sigma.rows() != sigma.cols()) throw Error(Errc::DimensionMismatch, "covariance must be square");
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success) throw Error(Errc::NotPositiveDefinite, "covariance is not positive definite");
  const Matrix lower = llt.matrixL();
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix draws(n, sigma.rows());
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < sigma.rows(); ++j) draws(i, j) = normal(rng);
  }
  return draws * lower.transpose();
}

SimDataset simulate_dataset(const SimScenario& scenario) {
  const Sigma sigma = build_sigma_checked(scenario);
  const Index dim = scenario.parts - 1;
  const Index markers = scenario.marker_coordinates();

  // Sigma is block diagonal between marker and noise coordinates, so the two
  // groups can be drawn from separate streams.
  Rng marker_rng = make_stream(scenario.seed, kMarkerStream);
  Rng noise_coord_rng = make_stream(scenario.seed, kNoiseCoordStream, scenario.noise_stream);
  Matrix pivot(scenario.n, dim);
  pivot.leftCols(markers) = mvn_sample(sigma.matrix.topLeftCorner(markers, markers), scenario.n, marker_rng);
  pivot.rightCols(dim - markers) =
      mvn_sample(sigma.matrix.bottomRightCorner(dim - markers, dim - markers), scenario.n, noise_coord_rng);

  Rng beta_rng = make_stream(scenario.beta_seed.value_or(scenario.seed), kBetaStream);
  std::uniform_real_distribution<double> unif(0.1, 1.0);
  Vector beta(markers);
  for (Index j = 0; j < markers; ++j) {
    const double magnitude = scenario.fixed_beta ? *scenario.fixed_beta : unif(beta_rng);
    beta(j) = magnitude;
  }
  // Odd positions within each block enter positively, even positions negatively.
  Index start = 0;
  for (Index width : scenario.block_sizes) {
    for (Index j = 0; j < width; ++j) {
      if (j % 2 == 1) beta(start + j) = -beta(start + j);
    }
    start += width;
  }

  Rng eps_rng = make_stream(scenario.seed, kEpsilonStream);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector noise(scenario.n);
  for (Index i = 0; i < scenario.n; ++i) noise(i) = scenario.noise_sd * normal(eps_rng);

  std::vector<bool> mask(static_cast<std::size_t>(scenario.parts), false);
  for (Index j = 0; j < markers; ++j) mask[static_cast<std::size_t>(j)] = true;

  CompositionMatrix x = inverse_pivot(pivot, 1.0);
  Vector y = pivot.leftCols(markers) * beta + noise;
  return SimDataset{std::move(x), std::move(y), std::move(pivot), std::move(beta),
                    std::move(noise), std::move(mask), sigma.shrink_factor};
}

SimScenario scenario_for_run(const SimScenario& base, std::uint64_t run, bool redraw_beta) {
  SimScenario s = base;
  Rng derive = make_stream(base.seed, 0x5eed, run);
  s.seed = derive();
  if (!redraw_beta) s.beta_seed = base.beta_seed.value_or(base.seed);
  return s;
}

MarkerRecovery marker_recovery(const BalanceCoefficients& balance, const std::vector<bool>& marker_mask) {
  if (static_cast<Index>(marker_mask.size()) != balance.coeffs.size()) {
    throw Error(Errc::DimensionMismatch, "marker mask length differs from part count");
  }
  MarkerRecovery out;
  out.included.resize(marker_mask.size());
  Index markers = 0;
  for (std::size_t i = 0; i < marker_mask.size(); ++i) {
    const bool in = balance.coeffs(static_cast<Index>(i)) != 0.0;
    out.included[i] = in;
    markers += marker_mask[i];
    if (in && marker_mask[i]) ++out.markers_included;
    if (in && !marker_mask[i]) ++out.noise_included;
  }
  const Index noise = static_cast<Index>(marker_mask.size()) - markers;
  out.marker_rate = markers > 0 ? static_cast<double>(out.markers_included) / static_cast<double>(markers) : 0.0;
  out.noise_rate = noise > 0 ? static_cast<double>(out.noise_included) / static_cast<double>(noise) : 0.0;
  return out;
}

MarkerRecovery marker_recovery(const BalanceBasis& basis, const std::vector<bool>& marker_mask) {
  if (basis.size() < 1) throw Error(Errc::InvalidArgument, "basis has no balances");
  BalanceCoefficients first;
  first.coeffs = basis.coefficients.col(0);
  return marker_recovery(first, marker_mask);
}

}  // namespace plspb
