#include "plspb/io.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "plspb/error.hpp"

namespace plspb {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  std::string out(s.substr(first, last - first + 1));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

double parse_number(const std::string& field, std::size_t line_no, std::size_t col) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  if (!field.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || field.empty()) {
    throw Error(Errc::Parse, "line " + std::to_string(line_no) + ", column " + std::to_string(col + 1) +
                                 ": '" + field + "' is not a number");
  }
  return value;
}

std::string header_line(const std::string& first, const std::vector<std::string>& rest) {
  std::string out = first;
  for (const auto& r : rest) out += "," + r;
  return out + "\n";
}

}  // namespace

Index CsvTable::column(const std::string& name) const {
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == name) return static_cast<Index>(j);
  }
  return -1;
}

CsvTable parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  CsvTable table;
  std::size_t line_no = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_line(line);
    if (table.header.empty()) {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw Error(Errc::Parse, "line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                                   " fields, header has " + std::to_string(table.header.size()));
    }
    std::vector<double> row(fields.size());
    for (std::size_t j = 0; j < fields.size(); ++j) row[j] = parse_number(fields[j], line_no, j);
    rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw Error(Errc::EmptyInput, "CSV has no header row");
  table.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(table.header.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) table.values(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  }
  return table;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw Error(Errc::Io, "failed writing '" + path.string() + "'");
}

CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_text_file(path)); }

Dataset load_dataset(const std::filesystem::path& data_path, const std::string& response_col,
                     const std::optional<std::filesystem::path>& response_path) {
  const CsvTable data = read_csv(data_path);
  if (data.values.rows() == 0) throw Error(Errc::EmptyInput, "'" + data_path.string() + "' has no rows");
  std::optional<Vector> y;
  Index skip = -1;
  if (response_path) {
    const CsvTable resp = read_csv(*response_path);
    Index col = response_col.empty() ? 0 : resp.column(response_col);
    if (col < 0) throw Error(Errc::InvalidArgument, "response column '" + response_col + "' not found");
    if (resp.values.rows() != data.values.rows()) {
      throw Error(Errc::DimensionMismatch, "response file row count differs from data");
    }
    y = resp.values.col(col);
  } else if (!response_col.empty()) {
    skip = data.column(response_col);
    if (skip < 0) throw Error(Errc::InvalidArgument, "response column '" + response_col + "' not found");
    y = data.values.col(skip);
  }
  std::vector<Index> part_cols;
  std::vector<std::string> names;
  for (Index j = 0; j < static_cast<Index>(data.header.size()); ++j) {
    if (j == skip) continue;
    part_cols.push_back(j);
    names.push_back(data.header[static_cast<std::size_t>(j)]);
  }
  Matrix parts(data.values.rows(), static_cast<Index>(part_cols.size()));
  for (std::size_t j = 0; j < part_cols.size(); ++j) parts.col(static_cast<Index>(j)) = data.values.col(part_cols[j]);
  return Dataset{CompositionMatrix(std::move(parts), std::move(names)), std::move(y)};
}

std::string format_double(double value) {
  if (value == 0.0) return "0";  // folds -0 into 0
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string composition_csv(const CompositionMatrix& x) {
  std::string out;
  const auto& names = x.part_names();
  for (std::size_t j = 0; j < names.size(); ++j) out += (j ? "," : "") + names[j];
  out += "\n";
  for (Index i = 0; i < x.samples(); ++i) {
    for (Index j = 0; j < x.parts(); ++j) out += (j ? "," : "") + format_double(x.values()(i, j));
    out += "\n";
  }
  return out;
}

std::string vector_csv(const std::string& name, const Vector& v) {
  std::string out = name + "\n";
  for (Index i = 0; i < v.size(); ++i) out += format_double(v(i)) + "\n";
  return out;
}

std::string basis_coefficients_csv(const BalanceBasis& basis) {
  std::vector<std::string> cols;
  for (Index k = 0; k < basis.size(); ++k) cols.push_back("PB" + std::to_string(k + 1));
  std::string out = header_line("part", cols);
  out += to_string(basis.criterion);
  for (Index k = 0; k < basis.size(); ++k) out += "," + format_double(basis.scores(k));
  out += "\n";
  for (Index i = 0; i < basis.parts(); ++i) {
    out += basis.part_names[static_cast<std::size_t>(i)];
    for (Index k = 0; k < basis.size(); ++k) out += "," + format_double(basis.coefficients(i, k));
    out += "\n";
  }
  return out;
}

std::string basis_signs_csv(const BalanceBasis& basis) {
  std::vector<std::string> cols;
  for (Index k = 0; k < basis.size(); ++k) cols.push_back("PB" + std::to_string(k + 1));
  std::string out = header_line("part", cols);
  for (Index i = 0; i < basis.parts(); ++i) {
    out += basis.part_names[static_cast<std::size_t>(i)];
    for (Index k = 0; k < basis.size(); ++k) out += "," + std::to_string(basis.signs(i, k));
    out += "\n";
  }
  return out;
}

nlohmann::json basis_tree_json(const BalanceBasis& basis) {
  auto names_of = [&](const std::vector<Index>& idx) {
    nlohmann::json arr = nlohmann::json::array();
    for (Index i : idx) arr.push_back(basis.part_names[static_cast<std::size_t>(i)]);
    return arr;
  };
  // Recursive lambda over the flat node array.
  std::function<nlohmann::json(int)> node_json = [&](int id) -> nlohmann::json {
    const PartitionNode& node = basis.tree[static_cast<std::size_t>(id)];
    nlohmann::json j;
    j["parts"] = names_of(node.parts);
    if (node.is_leaf()) return j;
    j["balance"] = {{"column", node.balance_column + 1},
                    {"score", basis.scores(node.balance_column)},
                    {"numerator", names_of(node.numerator)},
                    {"denominator", names_of(node.denominator)}};
    if (node.completion_column >= 0) {
      j["completion_balance"] = {{"column", node.completion_column + 1},
                                 {"score", basis.scores(node.completion_column)},
                                 {"numerator", names_of(node.zero)},
                                 {"denominator", names_of([&] {
                                    std::vector<Index> used = node.numerator;
                                    used.insert(used.end(), node.denominator.begin(), node.denominator.end());
                                    return used;
                                  }())}};
    }
    if (node.zero_child >= 0) j["zero"] = node_json(node.zero_child);
    if (node.numerator_child >= 0) j["numerator"] = node_json(node.numerator_child);
    if (node.denominator_child >= 0) j["denominator"] = node_json(node.denominator_child);
    return j;
  };
  nlohmann::json out;
  out["criterion"] = to_string(basis.criterion);
  out["parts"] = basis.parts();
  out["balances"] = basis.size();
  out["root"] = basis.tree.empty() ? nlohmann::json() : node_json(0);
  return out;
}

std::string latent_weights_csv(const LatentModel& model) {
  std::vector<std::string> cols;
  for (Index k = 0; k < model.components(); ++k) cols.push_back("C" + std::to_string(k + 1));
  std::string out = header_line("part", cols);
  for (Index i = 0; i < model.weights.rows(); ++i) {
    out += model.part_names.empty() ? "V" + std::to_string(i + 1) : model.part_names[static_cast<std::size_t>(i)];
    for (Index k = 0; k < model.components(); ++k) out += "," + format_double(model.weights(i, k));
    out += "\n";
  }
  return out;
}

nlohmann::json latent_model_json(const LatentModel& model) {
  auto vec = [](const Vector& v) {
    std::vector<double> out(v.data(), v.data() + v.size());
    return out;
  };
  nlohmann::json j;
  j["kind"] = model.kind == LatentKind::PLS ? "pls" : "pca";
  j["components"] = model.components();
  j["y_mean"] = model.y_mean;
  j["x_mean"] = vec(model.x_mean);
  if (model.latent_coefficients.size() > 0) {
    j["latent_coefficients"] = vec(model.latent_coefficients);
    j["clr_coefficients"] = vec(model.clr_coefficients());
  }
  if (model.explained_variance.size() > 0) j["explained_variance"] = vec(model.explained_variance);
  return j;
}

std::string cv_results_csv(const std::vector<CvResult>& results) {
  std::string out = "method,k,mean_error,sd_error\n";
  for (const auto& r : results) {
    for (Index k = 0; k < r.mean_error.size(); ++k) {
      out += to_string(r.method) + "," + std::to_string(k + 1) + "," + format_double(r.mean_error(k)) + "," +
             format_double(r.sd_error(k)) + "\n";
    }
  }
  return out;
}

std::string cv_selection_csv(const std::vector<CvResult>& results) {
  std::string out = "method,selected_k,metric,folds,repeats\n";
  for (const auto& r : results) {
    out += to_string(r.method) + "," + std::to_string(r.selected_k) + "," + to_string(r.metric) + "," +
           std::to_string(r.folds) + "," + std::to_string(r.repeats) + "\n";
  }
  return out;
}

std::string recovery_csv(const std::vector<RecoverySummary>& summaries,
                         const std::vector<std::string>& part_names) {
  std::string out = "part,method,inclusion_count,runs\n";
  for (const auto& s : summaries) {
    for (std::size_t i = 0; i < s.inclusion_counts.size(); ++i) {
      out += part_names[i] + "," + to_string(s.method) + "," + std::to_string(s.inclusion_counts[i]) + "," +
             std::to_string(s.runs) + "\n";
    }
  }
  return out;
}

nlohmann::json scenario_json(const SimScenario& s) {
  nlohmann::json j;
  j["case"] = to_string(s.sim_case);
  j["n"] = s.n;
  j["D"] = s.parts;
  j["block_sizes"] = s.block_sizes;
  j["seed"] = s.seed;
  j["noise_sd"] = s.noise_sd;
  j["block_diagonal"] = s.block_diagonal;
  j["off_diagonal"] = s.off_diagonal;
  if (s.sim_case == SimCase::SameSizedBlocks) j["block_strengths"] = s.block_strengths;
  j["allow_shrink"] = s.allow_shrink;
  if (s.fixed_beta) j["fixed_beta"] = *s.fixed_beta;
  if (s.beta_seed) j["beta_seed"] = *s.beta_seed;
  return j;
}

nlohmann::json dataset_manifest_json(const SimScenario& scenario, const SimDataset& data) {
  nlohmann::json j;
  j["scenario"] = scenario_json(scenario);
  j["seed"] = scenario.seed;
  j["beta"] = std::vector<double>(data.beta.data(), data.beta.data() + data.beta.size());
  j["marker_mask"] = data.marker_mask;
  j["shrink_factor"] = data.shrink_factor;
  return j;
}

}  // namespace plspb
