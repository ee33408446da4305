#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "plspb/coda.hpp"
#include "plspb/modelsel.hpp"
#include "plspb/pb.hpp"
#include "plspb/simgen.hpp"
#include "plspb/study.hpp"

namespace plspb {

/// Numeric CSV: one header row of column names, comma separated, decimal point.
struct CsvTable {
  std::vector<std::string> header;
  Matrix values;

  Index column(const std::string& name) const;  // -1 when absent
};

CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::filesystem::path& path);

struct Dataset {
  CompositionMatrix x;
  std::optional<Vector> y;
};

/// Loads compositions from `data_path`. The response is read from column
/// `response_col` of `response_path` when given, otherwise from that column of
/// the data file (which is then excluded from the parts).
Dataset load_dataset(const std::filesystem::path& data_path, const std::string& response_col = "",
                     const std::optional<std::filesystem::path>& response_path = std::nullopt);

/// Shortest text that parses back to the same double.
std::string format_double(double value);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

std::string composition_csv(const CompositionMatrix& x);
std::string vector_csv(const std::string& name, const Vector& v);

/// D rows x K columns; a second header line carries the score of each balance.
std::string basis_coefficients_csv(const BalanceBasis& basis);
std::string basis_signs_csv(const BalanceBasis& basis);
nlohmann::json basis_tree_json(const BalanceBasis& basis);

std::string latent_weights_csv(const LatentModel& model);
nlohmann::json latent_model_json(const LatentModel& model);

/// Columns: method,k,mean_error,sd_error.
std::string cv_results_csv(const std::vector<CvResult>& results);
/// Columns: method,selected_k,metric,folds,repeats.
std::string cv_selection_csv(const std::vector<CvResult>& results);

/// Long format, columns: part,method,inclusion_count,runs.
std::string recovery_csv(const std::vector<RecoverySummary>& summaries,
                         const std::vector<std::string>& part_names);

nlohmann::json scenario_json(const SimScenario& scenario);
nlohmann::json dataset_manifest_json(const SimScenario& scenario, const SimDataset& data);

}  // namespace plspb
