#include "cli.hpp"

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "plspb/error.hpp"
#include "plspb/io.hpp"
#include "plspb/latent.hpp"
#include "plspb/modelsel.hpp"
#include "plspb/pb.hpp"
#include "plspb/simgen.hpp"
#include "plspb/study.hpp"

namespace plspb::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// File name -> exact bytes. Written together with the manifest.
using Outputs = std::map<std::string, std::string>;

struct CommandResult {
  Outputs outputs;
  json extra = json::object();  // merged into the manifest
  std::string summary;          // printed to stdout
  bool self_check_failed = false;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

bool same_file(const fs::path& a, const fs::path& b) {
  std::error_code ec;
  return fs::weakly_canonical(a, ec) == fs::weakly_canonical(b, ec);
}

struct ScenarioFlags {
  std::string sim_case;
  Index n = 250;
  Index parts = 100;
  std::string blocks;
  double noise_sd = 1.0;
  double beta = 0.0;
  bool allow_shrink = false;
  std::uint64_t seed = 1;

  SimScenario scenario() const {
    SimScenario s = SimScenario::defaults(parse_sim_case(sim_case.empty() ? "one-block" : sim_case));
    s.n = n;
    s.parts = parts;
    if (!blocks.empty()) {
      s.block_sizes.clear();
      for (const auto& item : split_list(blocks)) {
        try {
          s.block_sizes.push_back(static_cast<Index>(std::stoll(item)));
        } catch (const std::exception&) {
          throw Error(Errc::InvalidArgument, "--blocks expects comma-separated integers, got '" + blocks + "'");
        }
      }
    }
    s.noise_sd = noise_sd;
    if (beta > 0.0) s.fixed_beta = beta;
    s.allow_shrink = allow_shrink;
    s.seed = seed;
    s.validate();
    return s;
  }
};

void add_scenario_flags(CLI::App* app, ScenarioFlags& f, const std::string& default_case) {
  f.sim_case = default_case;
  app->add_option("--case", f.sim_case, "Simulation design: one-block, same-blocks or different-blocks");
  app->add_option("--n", f.n, "Samples per simulated dataset");
  app->add_option("--d", f.parts, "Parts per composition");
  app->add_option("--blocks", f.blocks, "Marker block sizes, comma separated (default per case)");
  app->add_option("--noise-sd", f.noise_sd, "Standard deviation of the response noise");
  app->add_option("--beta", f.beta, "Fix every response coefficient magnitude (0 draws from U(0.1, 1))");
  app->add_flag("--allow-shrink", f.allow_shrink, "Shrink off-diagonals if the covariance is indefinite");
  app->add_option("--seed", f.seed, "Random seed");
}

struct DataFlags {
  std::string data;
  std::string response;
  std::string response_col;
  bool binary = false;

  Dataset load(bool need_response) const {
    if (data.empty()) throw Error(Errc::InvalidArgument, "--data is required");
    std::optional<fs::path> response_path;
    if (!response.empty()) response_path = response;
    Dataset ds = load_dataset(data, response_col, response_path);
    if (need_response && !ds.y) {
      throw Error(Errc::InvalidArgument, "a response is required: pass --response-col and/or --response");
    }
    if (ds.y && binary) {
      for (Index i = 0; i < ds.y->size(); ++i) {
        const double v = (*ds.y)(i);
        if (v != 0.0 && v != 1.0) throw Error(Errc::NonBinary, "--binary expects a 0/1 response");
      }
    }
    return ds;
  }

  std::vector<fs::path> inputs() const {
    std::vector<fs::path> paths;
    if (!data.empty()) paths.emplace_back(data);
    if (!response.empty()) paths.emplace_back(response);
    return paths;
  }
};

void add_data_flags(CLI::App* app, DataFlags& f) {
  app->add_option("--data", f.data, "CSV of compositions: header of part names, one sample per row");
  app->add_option("--response", f.response, "Separate CSV holding the response column");
  app->add_option("--response-col", f.response_col, "Name of the response column");
  app->add_flag("--binary", f.binary, "0/1 response: classification mode (misclassification error)");
}

// ---- simulate --------------------------------------------------------------

CommandResult cmd_simulate(const ScenarioFlags& flags) {
  const SimScenario scenario = flags.scenario();
  const SimDataset data = simulate_dataset(scenario);
  CommandResult result;
  result.outputs["X.csv"] = composition_csv(data.x);
  result.outputs["y.csv"] = vector_csv("y", data.y);
  result.extra["dataset"] = dataset_manifest_json(scenario, data);
  std::ostringstream msg;
  msg << "simulated " << scenario.n << " x " << scenario.parts << " (" << to_string(scenario.sim_case)
      << ", " << scenario.marker_coordinates() << " markers)";
  if (data.shrink_factor < 1.0) msg << "; off-diagonals shrunk by " << data.shrink_factor;
  result.summary = msg.str();
  return result;
}

// ---- fit -------------------------------------------------------------------

struct FitFlags {
  DataFlags data;
  std::string method = "pls-pb";
  Index k = 0;
};

CommandResult cmd_fit(const FitFlags& flags) {
  const Method method = parse_method(flags.method);
  const bool need_response = method != Method::PCA_PB || flags.k > 0;
  const Dataset ds = flags.data.load(need_response);
  CommandResult result;
  std::ostringstream msg;

  if (method == Method::PLS_RAW) {
    const Vector& y = *ds.y;
    const ClrMatrix raw = clr(ds.x);
    const Vector x_mean = raw.values.colwise().mean().transpose();
    const double y_mean = y.mean();
    const Vector yc = y.array() - y_mean;
    const LatentModel model =
        flags.k > 0 ? pls_fit(center_columns(raw), yc, flags.k, x_mean, y_mean)
                    : pls_fit_upto(center_columns(raw), yc,
                                   std::min(ds.x.parts() - 1, ds.x.samples() - 1), x_mean, y_mean);
    json model_json = latent_model_json(model);
    const Vector fitted = pls_predict(model, ds.x);
    if (flags.data.binary) {
      const auto labels = threshold_scores(fitted);
      std::vector<int> truth(static_cast<std::size_t>(y.size()));
      for (Index i = 0; i < y.size(); ++i) truth[static_cast<std::size_t>(i)] = static_cast<int>(y(i));
      model_json["training_me"] = misclassification_error(truth, labels);
    } else {
      model_json["training_rmsep"] = rmsep(y, fitted);
    }
    result.outputs["weights.csv"] = latent_weights_csv(model);
    result.outputs["model.json"] = model_json.dump(2) + "\n";
    msg << "fitted PLS with " << model.components() << " components";
    result.summary = msg.str();
    return result;
  }

  const BalanceBasis basis = method == Method::PLS_PB ? pls_pb(ds.x, *ds.y) : pca_pb(ds.x);
  const BasisCheck check = verify_basis(basis);
  result.self_check_failed = !check.ok();
  result.outputs["coefficients.csv"] = basis_coefficients_csv(basis);
  result.outputs["signs.csv"] = basis_signs_csv(basis);
  result.outputs["tree.json"] = basis_tree_json(basis).dump(2) + "\n";
  result.extra["self_check"] = {{"orthonormality_error", check.orthonormality_error},
                                {"zero_sum_error", check.zero_sum_error},
                                {"coefficient_error", check.coefficient_error},
                                {"nested", check.nested},
                                {"sorted", check.sorted},
                                {"passed", check.ok()}};
  if (flags.k > 0) {
    const BalanceRegression reg = fit_on_balances(ds.x, *ds.y, basis, flags.k);
    const Vector fitted = reg.predict(ds.x);
    json j;
    j["k"] = flags.k;
    j["intercept"] = reg.intercept;
    j["slopes"] = std::vector<double>(reg.slopes.data(), reg.slopes.data() + reg.slopes.size());
    if (flags.data.binary) {
      Vector labels(fitted.size());
      for (Index i = 0; i < fitted.size(); ++i) labels(i) = fitted(i) >= 0.5 ? 1.0 : 0.0;
      j["training_me"] = misclassification_error(*ds.y, labels);
    } else {
      j["training_rmsep"] = rmsep(*ds.y, fitted);
    }
    result.outputs["regression.json"] = j.dump(2) + "\n";
  }
  msg << "built " << basis.size() << " " << to_string(method) << " balances; self-check "
      << (check.ok() ? "passed" : "FAILED");
  result.summary = msg.str();
  return result;
}

// ---- cv --------------------------------------------------------------------

struct CvFlags {
  DataFlags data;
  ScenarioFlags scenario;
  std::string method = "pls-pb";
  bool all_methods = false;
  int folds = 5;
  int repeats = 100;
  int runs = 100;
  std::string metric;
  Index max_k = 0;
  bool fixed_beta_across_runs = false;
  unsigned threads = 0;
};

std::vector<Method> requested_methods(const std::string& list, bool all) {
  if (all) return {Method::PLS_PB, Method::PCA_PB, Method::PLS_RAW};
  std::vector<Method> methods;
  for (const auto& name : split_list(list)) methods.push_back(parse_method(name));
  if (methods.empty()) throw Error(Errc::InvalidArgument, "no method given");
  return methods;
}

CommandResult cmd_cv(const CvFlags& flags) {
  const std::vector<Method> methods = requested_methods(flags.method, flags.all_methods);
  const Metric metric = flags.metric.empty() ? (flags.data.binary ? Metric::ME : Metric::RMSEP)
                                             : parse_metric(flags.metric);
  std::vector<CvResult> results;
  if (!flags.scenario.sim_case.empty()) {
    if (!flags.data.data.empty()) throw Error(Errc::InvalidArgument, "pass either --data or --case, not both");
    SimulationCvOptions options;
    options.methods = methods;
    options.metric = metric;
    options.max_k = flags.max_k;
    options.folds = flags.folds;
    options.runs = flags.runs;
    options.redraw_beta = !flags.fixed_beta_across_runs;
    options.threads = flags.threads;
    results = simulation_cv(flags.scenario.scenario(), options);
  } else {
    const Dataset ds = flags.data.load(true);
    for (Method m : methods) {
      CvOptions options;
      options.method = m;
      options.metric = metric;
      options.max_k = flags.max_k;
      options.folds = flags.folds;
      options.repeats = flags.repeats;
      options.seed = flags.scenario.seed;
      options.threads = flags.threads;
      results.push_back(cross_validate(ds.x, *ds.y, options));
    }
  }
  CommandResult result;
  result.outputs["cv.csv"] = cv_results_csv(results);
  result.outputs["selected.csv"] = cv_selection_csv(results);
  std::ostringstream msg;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const CvResult& r = results[i];
    msg << (i ? "\n" : "") << to_string(r.method) << ": selected k = " << r.selected_k << " (mean "
        << to_string(r.metric) << " " << format_double(r.mean_error(r.selected_k - 1)) << ")";
  }
  result.summary = msg.str();
  return result;
}

// ---- recover ---------------------------------------------------------------

struct RecoverFlags {
  ScenarioFlags scenario;
  std::string method = "pls-pb,pca-pb";
  int runs = 100;
  bool fixed_beta_across_runs = false;
  unsigned threads = 0;
};

CommandResult cmd_recover(const RecoverFlags& flags) {
  const SimScenario scenario = flags.scenario.scenario();
  RecoveryOptions options;
  options.methods = requested_methods(flags.method, false);
  options.runs = flags.runs;
  options.redraw_beta = !flags.fixed_beta_across_runs;
  options.threads = flags.threads;
  const auto summaries = recovery_study(scenario, options);
  CommandResult result;
  result.outputs["recovery.csv"] = recovery_csv(summaries, default_part_names(scenario.parts));
  std::string rates = "method,mean_marker_rate,mean_noise_rate,runs\n";
  std::ostringstream msg;
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    const auto& s = summaries[i];
    rates += to_string(s.method) + "," + format_double(s.mean_marker_rate) + "," +
             format_double(s.mean_noise_rate) + "," + std::to_string(s.runs) + "\n";
    msg << (i ? "\n" : "") << to_string(s.method) << ": markers " << format_double(s.mean_marker_rate)
        << ", noise " << format_double(s.mean_noise_rate);
  }
  result.outputs["recovery_summary.csv"] = rates;
  result.summary = msg.str();
  return result;
}

// ---- manifest plumbing -----------------------------------------------------

json capture_config(const CLI::App* sub) {
  json config = json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string name = opt->get_lnames().front();
    if (name == "help" || name == "out") continue;
    if (opt->get_expected_min() == 0) {
      config[name] = opt->count() > 0;
    } else if (opt->count() > 0) {
      std::string joined;
      for (const auto& r : opt->results()) joined += (joined.empty() ? "" : ",") + r;
      if (name == "data" || name == "response") joined = fs::absolute(joined).lexically_normal().string();
      config[name] = joined;
    } else if (!opt->get_default_str().empty()) {
      config[name] = opt->get_default_str();
    }
  }
  return config;
}

std::vector<std::string> config_to_args(const std::string& command, const json& config) {
  std::vector<std::string> args{command};
  for (const auto& [key, value] : config.items()) {
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back("--" + key);
    } else {
      args.push_back("--" + key);
      args.push_back(value.is_string() ? value.get<std::string>() : value.dump());
    }
  }
  return args;
}

int emit(const std::string& command, const CLI::App* sub, const std::string& out_dir,
         const std::vector<fs::path>& inputs, std::uint64_t seed, const std::string& started,
         CommandResult result, std::ostream& out, std::ostream& err) {
  if (out_dir.empty()) throw Error(Errc::InvalidArgument, "--out is required");
  const fs::path dir(out_dir);
  result.outputs["manifest.json"];  // reserve the name for the input-collision check
  for (const auto& [name, bytes] : result.outputs) {
    for (const auto& input : inputs) {
      if (same_file(dir / name, input)) {
        throw Error(Errc::InvalidArgument, "output '" + (dir / name).string() + "' would overwrite an input");
      }
    }
  }
  result.outputs.erase("manifest.json");
  json hashes = json::object();
  for (const auto& [name, bytes] : result.outputs) {
    write_text_file(dir / name, bytes);
    hashes[name] = content_hash(bytes);
  }
  json manifest;
  manifest["command"] = command;
  manifest["config"] = capture_config(sub);
  manifest["seed"] = seed;
  manifest["tool_version"] = kToolVersion;
  manifest["started_at"] = started;
  manifest["finished_at"] = utc_timestamp();
  manifest["outputs"] = hashes;
  for (const auto& [key, value] : result.extra.items()) manifest[key] = value;
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
  out << result.summary << "\n";
  if (result.self_check_failed) {
    err << "error: basis self-check failed (see manifest.json)\n";
    return kExitSelfCheck;
  }
  return 0;
}

}  // namespace

std::string content_hash(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"PLS principal balances for compositional regression and classification", "plspb"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.set_version_flag("--version", kToolVersion);

  std::string out_dir;

  ScenarioFlags sim_flags;
  CLI::App* sim = app.add_subcommand("simulate", "Simulate a pivot-coordinate dataset (X.csv, y.csv)");
  add_scenario_flags(sim, sim_flags, "one-block");
  sim->add_option("--out", out_dir, "Output directory")->required();

  FitFlags fit_flags;
  CLI::App* fit = app.add_subcommand("fit", "Build PLS-PB / PCA-PB balances or a PLS model");
  add_data_flags(fit, fit_flags.data);
  fit->add_option("--method", fit_flags.method, "pls-pb, pca-pb or pls");
  fit->add_option("--k", fit_flags.k,
                  "pls: component count (0 = all supported); balances: also fit OLS on the first k");
  fit->add_option("--out", out_dir, "Output directory")->required();

  CvFlags cv_flags;
  CLI::App* cv = app.add_subcommand("cv", "Cross-validated error curves and one-SE model size");
  add_data_flags(cv, cv_flags.data);
  add_scenario_flags(cv, cv_flags.scenario, "");
  cv->add_option("--method", cv_flags.method, "Comma-separated methods: pls-pb, pca-pb, pls");
  cv->add_flag("--all-methods", cv_flags.all_methods, "Compare pls-pb, pca-pb and pls");
  cv->add_option("--folds", cv_flags.folds, "Folds per cross-validation");
  cv->add_option("--repeats", cv_flags.repeats, "Shuffled repeats on a fixed dataset (--data mode)");
  cv->add_option("--runs", cv_flags.runs, "Fresh simulated datasets (--case mode)");
  cv->add_option("--metric", cv_flags.metric, "rmsep or me (default: me with --binary, else rmsep)");
  cv->add_option("--max-k", cv_flags.max_k, "Largest model size (0 = all supported)");
  cv->add_flag("--fixed-beta-across-runs", cv_flags.fixed_beta_across_runs,
               "Draw response coefficients once for all runs");
  cv->add_option("--threads", cv_flags.threads, "Worker threads (0 = hardware concurrency)");
  cv->add_option("--out", out_dir, "Output directory")->required();

  RecoverFlags rec_flags;
  CLI::App* rec = app.add_subcommand("recover", "First-balance marker inclusion counts over simulated runs");
  add_scenario_flags(rec, rec_flags.scenario, "one-block");
  rec->add_option("--method", rec_flags.method, "Comma-separated balance methods");
  rec->add_option("--runs", rec_flags.runs, "Simulated datasets");
  rec->add_flag("--fixed-beta-across-runs", rec_flags.fixed_beta_across_runs,
                "Draw response coefficients once for all runs");
  rec->add_option("--threads", rec_flags.threads, "Worker threads (0 = hardware concurrency)");
  rec->add_option("--out", out_dir, "Output directory")->required();

  std::string manifest_path;
  bool verify = false;
  CLI::App* rerun = app.add_subcommand("rerun", "Re-execute the command recorded in a manifest");
  rerun->add_option("--manifest", manifest_path, "manifest.json of an earlier run")->required();
  rerun->add_option("--out", out_dir, "Output directory (default: the manifest's directory)");
  rerun->add_flag("--verify", verify, "Fail unless every output hash matches the manifest");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  const std::string started = utc_timestamp();
  try {
    if (sim->parsed()) {
      return emit("simulate", sim, out_dir, {}, sim_flags.seed, started, cmd_simulate(sim_flags), out, err);
    }
    if (fit->parsed()) {
      return emit("fit", fit, out_dir, fit_flags.data.inputs(), 0, started, cmd_fit(fit_flags), out, err);
    }
    if (cv->parsed()) {
      return emit("cv", cv, out_dir, cv_flags.data.inputs(), cv_flags.scenario.seed, started, cmd_cv(cv_flags),
                  out, err);
    }
    if (rec->parsed()) {
      return emit("recover", rec, out_dir, {}, rec_flags.scenario.seed, started, cmd_recover(rec_flags), out,
                  err);
    }
    if (rerun->parsed()) {
      const json manifest = json::parse(read_text_file(manifest_path));
      const std::string target = out_dir.empty() ? fs::path(manifest_path).parent_path().string() : out_dir;
      std::vector<std::string> replay = config_to_args(manifest.at("command").get<std::string>(),
                                                       manifest.at("config"));
      replay.push_back("--out");
      replay.push_back(target.empty() ? "." : target);
      const int code = run(replay, out, err);
      if (code != 0 || !verify) return code;
      int mismatches = 0;
      for (const auto& [name, hash] : manifest.at("outputs").items()) {
        const std::string now = content_hash(read_text_file(fs::path(target.empty() ? "." : target) / name));
        if (now != hash.get<std::string>()) {
          err << "mismatch: " << name << " (" << now << " != " << hash.get<std::string>() << ")\n";
          ++mismatches;
        }
      }
      if (mismatches > 0) return kExitMismatch;
      out << "reproduced " << manifest.at("outputs").size() << " outputs byte-identically\n";
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const json::exception& e) {
    err << "error: malformed manifest: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace plspb::cli
