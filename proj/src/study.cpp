#include "plspb/study.hpp"

#include "plspb/error.hpp"

namespace plspb {
namespace {

constexpr std::uint64_t kFoldStream = 7;

}  // namespace

std::vector<CvResult> simulation_cv(const SimScenario& base, const SimulationCvOptions& options) {
  base.validate();
  if (options.runs < 1) throw Error(Errc::InvalidArgument, "at least one run is required");
  if (options.methods.empty()) throw Error(Errc::InvalidArgument, "no methods requested");
  if (options.folds < 2) throw Error(Errc::InvalidArgument, "at least two folds are required");
  if (base.n < options.folds) throw Error(Errc::TooFewSamples, "fewer samples than folds");
  const Index supported = max_supported_k(base.n, base.parts, options.folds);
  if (supported < 1) throw Error(Errc::TooFewSamples, "training folds are too small to fit any model");
  const Index max_k = options.max_k > 0 ? options.max_k : supported;
  if (max_k > supported) {
    throw Error(Errc::TooFewSamples, "max_k exceeds what every training fold supports");
  }

  std::vector<Matrix> per_run(options.methods.size(), Matrix(options.runs, max_k));
  parallel_for(
      static_cast<std::size_t>(options.runs),
      [&](std::size_t run) {
        const SimScenario scenario = scenario_for_run(base, run, options.redraw_beta);
        const SimDataset data = simulate_dataset(scenario);
        Rng fold_rng = make_stream(scenario.seed, kFoldStream);
        const auto fold_of = assign_folds(scenario.n, options.folds, fold_rng);
        for (std::size_t m = 0; m < options.methods.size(); ++m) {
          const Matrix predictions = cv_predictions(data.x, data.y, options.methods[m], max_k, fold_of);
          per_run[m].row(static_cast<Index>(run)) =
              prediction_errors(data.y, predictions, options.metric).transpose();
        }
      },
      options.threads);

  std::vector<CvResult> results;
  results.reserve(options.methods.size());
  for (std::size_t m = 0; m < options.methods.size(); ++m) {
    results.push_back(summarize_errors(per_run[m], options.methods[m], options.metric, options.folds));
  }
  return results;
}

std::vector<RecoverySummary> recovery_study(const SimScenario& base, const RecoveryOptions& options) {
  base.validate();
  if (options.runs < 1) throw Error(Errc::InvalidArgument, "at least one run is required");
  for (Method m : options.methods) {
    if (m == Method::PLS_RAW) throw Error(Errc::InvalidArgument, "marker recovery needs a balance method");
  }
  const std::size_t methods = options.methods.size();
  const auto runs = static_cast<std::size_t>(options.runs);
  std::vector<std::vector<MarkerRecovery>> per_run(methods, std::vector<MarkerRecovery>(runs));
  std::vector<bool> mask;
  parallel_for(
      runs,
      [&](std::size_t run) {
        const SimDataset data = simulate_dataset(scenario_for_run(base, run, options.redraw_beta));
        for (std::size_t m = 0; m < methods; ++m) {
          const BalanceBasis basis =
              options.methods[m] == Method::PLS_PB ? pls_pb(data.x, data.y) : pca_pb(data.x);
          per_run[m][run] = marker_recovery(basis, data.marker_mask);
        }
      },
      options.threads);
  mask.assign(static_cast<std::size_t>(base.parts), false);
  for (Index j = 0; j < base.marker_coordinates(); ++j) mask[static_cast<std::size_t>(j)] = true;

  std::vector<RecoverySummary> out;
  for (std::size_t m = 0; m < methods; ++m) {
    RecoverySummary summary;
    summary.method = options.methods[m];
    summary.runs = options.runs;
    summary.inclusion_counts.assign(static_cast<std::size_t>(base.parts), 0);
    summary.marker_mask = mask;
    for (const MarkerRecovery& rec : per_run[m]) {
      for (std::size_t i = 0; i < rec.included.size(); ++i) summary.inclusion_counts[i] += rec.included[i];
      summary.mean_marker_rate += rec.marker_rate;
      summary.mean_noise_rate += rec.noise_rate;
    }
    summary.mean_marker_rate /= options.runs;
    summary.mean_noise_rate /= options.runs;
    out.push_back(std::move(summary));
  }
  return out;
}

}  // namespace plspb
