#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "plspb/coda.hpp"
#include "plspb/pb.hpp"
#include "plspb/rng.hpp"

namespace plspb {

enum class SimCase { OneBlock, SameSizedBlocks, DifferentSizedBlocks };

std::string to_string(SimCase c);
SimCase parse_sim_case(const std::string& name);

/// Pivot-coordinate simulation design. Marker blocks occupy the leading pivot
/// coordinates in order; the remaining coordinates are independent N(0, 1) noise.
struct SimScenario {
  SimCase sim_case = SimCase::OneBlock;
  Index n = 250;
  Index parts = 100;
  std::vector<Index> block_sizes{20};
  std::uint64_t seed = 1;
  double noise_sd = 1.0;

  double block_diagonal = 2.0;
  double off_diagonal = 0.5;
  /// Per-block strength multipliers for SameSizedBlocks, cycled if there are more blocks.
  std::vector<double> block_strengths{1.0, 0.4, 0.8, 0.6};
  /// Shrink off-diagonals until positive definite instead of throwing.
  bool allow_shrink = false;

  /// Replaces the U(0.1, 1) draw of every coefficient when set.
  std::optional<double> fixed_beta;
  /// Seed for the coefficient draw; defaults to `seed`. Fixing it across runs
  /// keeps the same coefficients for every simulated dataset.
  std::optional<std::uint64_t> beta_seed;
  /// Mixed into the noise-coordinate stream only.
  std::uint64_t noise_stream = 0;

  Index marker_coordinates() const;
  /// Throws InvalidArgument when the design is inconsistent.
  void validate() const;

  static SimScenario defaults(SimCase c);
};

struct Sigma {
  Matrix matrix;
  double shrink_factor = 1.0;  // < 1 when off-diagonals were shrunk
};

Sigma build_sigma_checked(const SimScenario& scenario);
Matrix build_sigma(const SimScenario& scenario);

/// n draws from N(0, sigma) as rows, via the lower Cholesky factor.
Matrix mvn_sample(const Matrix& sigma, Index n, Rng& rng);

struct SimDataset {
  CompositionMatrix x;
  Vector y;
  Matrix pivot;          // sampled pivot coordinates, n x (D - 1)
  Vector beta;           // signed response coefficients on the marker coordinates
  Vector noise;          // epsilon
  std::vector<bool> marker_mask;
  double shrink_factor = 1.0;
};

SimDataset simulate_dataset(const SimScenario& scenario);

/// Scenario for run `run` of a Monte Carlo study: its own seed, and the base
/// coefficient seed unless `redraw_beta`.
SimScenario scenario_for_run(const SimScenario& base, std::uint64_t run, bool redraw_beta = true);

struct MarkerRecovery {
  std::vector<bool> included;
  Index markers_included = 0;
  Index noise_included = 0;
  double marker_rate = 0.0;
  double noise_rate = 0.0;
};

MarkerRecovery marker_recovery(const BalanceCoefficients& balance, const std::vector<bool>& marker_mask);
/// Uses the first balance of the basis.
MarkerRecovery marker_recovery(const BalanceBasis& basis, const std::vector<bool>& marker_mask);

}  // namespace plspb
