#pragma once

#include <vector>

#include "plspb/modelsel.hpp"
#include "plspb/simgen.hpp"

namespace plspb {

/// Monte Carlo drivers: every run simulates a fresh dataset from
/// scenario_for_run(base, run) and all methods see the same data and folds.

struct SimulationCvOptions {
  std::vector<Method> methods{Method::PLS_PB, Method::PCA_PB, Method::PLS_RAW};
  Metric metric = Metric::RMSEP;
  Index max_k = 0;  // 0: largest supported
  int folds = 5;
  int runs = 100;
  bool redraw_beta = true;
  unsigned threads = 0;
};

/// One CvResult per method; `repeats` counts simulation runs.
std::vector<CvResult> simulation_cv(const SimScenario& base, const SimulationCvOptions& options);

struct RecoveryOptions {
  std::vector<Method> methods{Method::PLS_PB, Method::PCA_PB};
  int runs = 100;
  bool redraw_beta = true;
  unsigned threads = 0;
};

struct RecoverySummary {
  Method method = Method::PLS_PB;
  std::vector<int> inclusion_counts;  // per part, how many runs had it in the first balance
  int runs = 0;
  double mean_marker_rate = 0.0;
  double mean_noise_rate = 0.0;
  std::vector<bool> marker_mask;
};

/// First-balance inclusion counts for the balance methods (PLS_RAW is rejected).
std::vector<RecoverySummary> recovery_study(const SimScenario& base, const RecoveryOptions& options);

}  // namespace plspb
