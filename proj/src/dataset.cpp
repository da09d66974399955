#include "lvfuse/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "lvfuse/error.hpp"
#include "lvfuse/random.hpp"

namespace lvfuse {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(std::string_view value) {
  std::vector<std::string> out;
  if (trim(value).empty()) return out;
  for (auto& item : split_csv_line(value)) {
    if (item.empty()) throw SchemaError("empty entry in list '" + std::string(value) + "'");
    out.push_back(std::move(item));
  }
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += items[i];
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string format_number(double v) {
  std::ostringstream ss;
  ss.imbue(std::locale::classic());
  ss << std::setprecision(17) << v;
  return ss.str();
}

std::optional<int> CategoricalVariable::find(std::string_view level) const {
  const auto it = std::find(levels.begin(), levels.end(), level);
  if (it == levels.end()) return std::nullopt;
  return static_cast<int>(it - levels.begin());
}

int CategoricalVariable::index_of(std::string_view level) const {
  if (auto i = find(level)) return *i;
  throw UnknownLevelError(name, std::string(level));
}

int CategoricalVariable::register_level(std::string_view level) {
  if (auto i = find(level)) return *i;
  levels.emplace_back(level);
  return static_cast<int>(levels.size()) - 1;
}

std::vector<CategoricalVariable> VariableSchema::categorical_variables() const {
  std::vector<CategoricalVariable> out = categorical_inputs;
  out.push_back(source);
  return out;
}

CategoricalVariable& VariableSchema::categorical(std::size_t j) {
  return j < categorical_inputs.size() ? categorical_inputs[j] : source;
}

const CategoricalVariable& VariableSchema::categorical(std::size_t j) const {
  return j < categorical_inputs.size() ? categorical_inputs[j] : source;
}

void VariableSchema::validate() const {
  if (source.name.empty()) throw SchemaError("schema has no source_column");
  if (response_column.empty()) throw SchemaError("schema has no response_column");
  std::set<std::string> seen;
  auto claim = [&](const std::string& name) {
    if (name.empty()) throw SchemaError("empty column name in schema");
    if (!seen.insert(name).second) throw SchemaError("column '" + name + "' used twice in schema");
  };
  for (const auto& n : numeric_inputs) claim(n);
  for (const auto& c : categorical_inputs) claim(c.name);
  claim(source.name);
  claim(response_column);
  for (std::size_t j = 0; j < categorical_count(); ++j) {
    const auto& var = categorical(j);
    std::set<std::string> levels(var.levels.begin(), var.levels.end());
    if (levels.size() != var.levels.size())
      throw SchemaError("duplicate level in variable '" + var.name + "'");
  }
}

VariableSchema parse_schema(std::string_view text) {
  VariableSchema schema;
  std::map<std::string, std::vector<std::string>> declared_levels;
  std::vector<std::string> categorical_names;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw SchemaError("schema line " + std::to_string(line_no) + ": expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key == "numeric_inputs") {
      schema.numeric_inputs = split_list(value);
    } else if (key == "categorical_inputs") {
      categorical_names = split_list(value);
    } else if (key == "source_column") {
      schema.source.name = std::string(value);
    } else if (key == "response_column") {
      schema.response_column = std::string(value);
    } else if (key.starts_with("levels.")) {
      declared_levels[key.substr(7)] = split_list(value);
    } else {
      throw SchemaError("schema line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  for (const auto& name : categorical_names) schema.categorical_inputs.push_back({name, {}});
  for (auto& [column, levels] : declared_levels) {
    bool matched = false;
    for (std::size_t j = 0; j < schema.categorical_count(); ++j) {
      if (schema.categorical(j).name == column) {
        schema.categorical(j).levels = levels;
        matched = true;
      }
    }
    if (!matched) throw SchemaError("levels declared for non-categorical column '" + column + "'");
  }
  schema.validate();
  return schema;
}

VariableSchema load_schema(const std::filesystem::path& path) {
  return parse_schema(read_file(path));
}

std::string format_schema(const VariableSchema& schema) {
  std::ostringstream out;
  out << "numeric_inputs = " << join(schema.numeric_inputs) << "\n";
  std::vector<std::string> names;
  for (const auto& c : schema.categorical_inputs) names.push_back(c.name);
  out << "categorical_inputs = " << join(names) << "\n";
  out << "source_column = " << schema.source.name << "\n";
  out << "response_column = " << schema.response_column << "\n";
  for (std::size_t j = 0; j < schema.categorical_count(); ++j) {
    const auto& var = schema.categorical(j);
    if (!var.levels.empty()) out << "levels." << var.name << " = " << join(var.levels) << "\n";
  }
  return out.str();
}

void save_schema(const VariableSchema& schema, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << format_schema(schema);
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

double parse_number(std::string_view cell) {
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(value))
    throw DataError("not a finite number: '" + std::string(cell) + "'");
  return value;
}

MultiSourceDataset parse_csv(std::string_view text, VariableSchema schema) {
  schema.validate();
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(start, nl - start);
    if (!trim(line).empty()) lines.push_back(line);
    start = nl + 1;
  }
  if (lines.empty()) throw DataError("empty file: no header row");
  // Strip a UTF-8 byte order mark.
  if (lines[0].starts_with("\xEF\xBB\xBF")) lines[0].remove_prefix(3);

  const auto header = split_csv_line(lines[0]);
  auto column = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw SchemaError("missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  std::vector<std::size_t> numeric_cols;
  for (const auto& n : schema.numeric_inputs) numeric_cols.push_back(column(n));
  std::vector<std::size_t> cat_cols;
  for (std::size_t j = 0; j < schema.categorical_count(); ++j)
    cat_cols.push_back(column(schema.categorical(j).name));
  const std::size_t response_col = column(schema.response_column);

  const std::size_t n = lines.size() - 1;
  if (n == 0) throw DataError("empty dataset: header but no rows");
  const auto m = static_cast<Eigen::Index>(numeric_cols.size());
  const auto q = static_cast<Eigen::Index>(cat_cols.size());
  MultiSourceDataset data;
  data.numeric.resize(static_cast<Eigen::Index>(n), m);
  data.levels.resize(static_cast<Eigen::Index>(n), q);
  data.response.resize(static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) {
    const auto cells = split_csv_line(lines[r + 1]);
    if (cells.size() != header.size())
      throw ParseError(r + 1, "expected " + std::to_string(header.size()) + " cells, found " +
                                  std::to_string(cells.size()));
    const auto i = static_cast<Eigen::Index>(r);
    try {
      for (Eigen::Index c = 0; c < m; ++c) data.numeric(i, c) = parse_number(cells[numeric_cols[c]]);
      data.response(i) = parse_number(cells[response_col]);
    } catch (const DataError& e) {
      throw ParseError(r + 1, e.what());
    }
    for (Eigen::Index j = 0; j < q; ++j) {
      const auto& cell = cells[cat_cols[j]];
      if (cell.empty()) throw ParseError(r + 1, "missing level for '" + schema.categorical(j).name + "'");
      data.levels(i, j) = schema.categorical(j).register_level(cell);
    }
  }
  data.schema = std::move(schema);
  return data;
}

MultiSourceDataset load_csv(const std::filesystem::path& path, VariableSchema schema) {
  return parse_csv(read_file(path), std::move(schema));
}

void save_csv(const MultiSourceDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  const auto& s = data.schema;
  std::vector<std::string> header = s.numeric_inputs;
  for (std::size_t j = 0; j < s.categorical_count(); ++j) header.push_back(s.categorical(j).name);
  header.push_back(s.response_column);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << "\n";
  for (Eigen::Index r = 0; r < data.numeric.rows(); ++r) {
    bool first = true;
    auto cell = [&](const std::string& v) {
      out << (first ? "" : ",") << v;
      first = false;
    };
    for (Eigen::Index c = 0; c < data.numeric.cols(); ++c) cell(format_number(data.numeric(r, c)));
    for (Eigen::Index j = 0; j < data.levels.cols(); ++j)
      cell(s.categorical(static_cast<std::size_t>(j)).levels[static_cast<std::size_t>(data.levels(r, j))]);
    cell(format_number(data.response(r)));
    out << "\n";
  }
}

MultiSourceDataset MultiSourceDataset::subset(const std::vector<std::size_t>& rows) const {
  MultiSourceDataset out;
  out.schema = schema;
  const auto k = static_cast<Eigen::Index>(rows.size());
  out.numeric.resize(k, numeric.cols());
  out.levels.resize(k, levels.cols());
  out.response.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto r = static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)]);
    out.numeric.row(i) = numeric.row(r);
    out.levels.row(i) = levels.row(r);
    out.response(i) = response(r);
  }
  return out;
}

std::vector<std::size_t> MultiSourceDataset::rows_of_source(int code) const {
  std::vector<std::size_t> rows;
  const auto col = static_cast<Eigen::Index>(schema.source_index());
  for (Eigen::Index r = 0; r < levels.rows(); ++r)
    if (levels(r, col) == code) rows.push_back(static_cast<std::size_t>(r));
  return rows;
}

std::vector<std::size_t> MultiSourceDataset::rows_of_source(std::string_view level) const {
  return rows_of_source(schema.source.index_of(level));
}

std::vector<std::size_t> MultiSourceDataset::source_counts() const {
  std::vector<std::size_t> counts(schema.source.levels.size(), 0);
  const auto col = static_cast<Eigen::Index>(schema.source_index());
  for (Eigen::Index r = 0; r < levels.rows(); ++r) ++counts[static_cast<std::size_t>(levels(r, col))];
  return counts;
}

MultiSourceDataset MultiSourceDataset::without_unused_levels() const {
  MultiSourceDataset out = *this;
  for (Eigen::Index j = 0; j < levels.cols(); ++j) {
    auto& var = out.schema.categorical(static_cast<std::size_t>(j));
    std::vector<int> remap(var.levels.size(), -1);
    std::vector<bool> used(var.levels.size(), false);
    for (Eigen::Index r = 0; r < levels.rows(); ++r) used[static_cast<std::size_t>(levels(r, j))] = true;
    std::vector<std::string> kept;
    for (std::size_t l = 0; l < var.levels.size(); ++l) {
      if (!used[l]) continue;
      remap[l] = static_cast<int>(kept.size());
      kept.push_back(var.levels[l]);
    }
    var.levels = std::move(kept);
    for (Eigen::Index r = 0; r < levels.rows(); ++r)
      out.levels(r, j) = remap[static_cast<std::size_t>(levels(r, j))];
  }
  return out;
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& response) {
  if (response.size() < 2) throw DataError("standardize needs at least 2 rows");
  Standardizer s;
  s.input_min = inputs.colwise().minCoeff().transpose();
  s.input_max = inputs.colwise().maxCoeff().transpose();
  s.response_mean = response.mean();
  const double var = (response.array() - s.response_mean).square().mean();
  s.response_std = std::sqrt(var);
  // Constant within rounding of the mean.
  s.constant_response = !(s.response_std > 1e-12 * std::max(1.0, std::abs(s.response_mean)));
  if (s.constant_response) s.response_std = 0.0;
  return s;
}

Eigen::MatrixXd Standardizer::scale_inputs(const Eigen::MatrixXd& x) const {
  if (x.cols() != input_min.size()) throw DataError("input dimension mismatch in scaler");
  Eigen::MatrixXd u(x.rows(), x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double span = input_max(c) - input_min(c);
    // Constant columns sit at 0.5; offsets keep the map invertible.
    if (span > 0)
      u.col(c) = (x.col(c).array() - input_min(c)) / span;
    else
      u.col(c) = x.col(c).array() - input_min(c) + 0.5;
  }
  return u;
}

Eigen::MatrixXd Standardizer::unscale_inputs(const Eigen::MatrixXd& u) const {
  if (u.cols() != input_min.size()) throw DataError("input dimension mismatch in scaler");
  Eigen::MatrixXd x(u.rows(), u.cols());
  for (Eigen::Index c = 0; c < u.cols(); ++c) {
    const double span = input_max(c) - input_min(c);
    if (span > 0)
      x.col(c) = u.col(c).array() * span + input_min(c);
    else
      x.col(c) = u.col(c).array() - 0.5 + input_min(c);
  }
  return x;
}

Eigen::VectorXd Standardizer::scale_response(const Eigen::VectorXd& y) const {
  const double divisor = constant_response ? 1.0 : response_std;
  return (y.array() - response_mean) / divisor;
}

double Standardizer::unscale_response(double v) const {
  return constant_response ? response_mean + v : v * response_std + response_mean;
}

Eigen::VectorXd Standardizer::unscale_response(const Eigen::VectorXd& v) const {
  Eigen::VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out(i) = unscale_response(v(i));
  return out;
}

double Standardizer::unscale_variance(double var) const {
  return constant_response ? 0.0 : var * response_std * response_std;
}

std::pair<MultiSourceDataset, Standardizer> standardize(const MultiSourceDataset& train) {
  auto scaler = Standardizer::fit(train.numeric, train.response);
  MultiSourceDataset out = train;
  out.numeric = scaler.scale_inputs(train.numeric);
  out.response = scaler.scale_response(train.response);
  return {std::move(out), std::move(scaler)};
}

std::vector<std::size_t> stratified_fold_assignment(const MultiSourceDataset& data, int k,
                                                    std::uint64_t seed) {
  if (k < 2) throw DataError("k-fold needs k >= 2");
  if (static_cast<std::size_t>(k) > data.size())
    throw DataError("k = " + std::to_string(k) + " exceeds row count " + std::to_string(data.size()));
  std::vector<std::size_t> fold(data.size(), 0);
  std::size_t deal = 0;
  for (std::size_t code = 0; code < data.schema.source.levels.size(); ++code) {
    auto rows = data.rows_of_source(static_cast<int>(code));
    CounterRng rng(seed, "kfold/" + data.schema.source.levels[code]);
    rng.shuffle(rows);
    for (auto r : rows) fold[r] = deal++ % static_cast<std::size_t>(k);
  }
  return fold;
}

std::vector<Fold> stratified_kfold(const MultiSourceDataset& data, int k, std::uint64_t seed) {
  const auto assignment = stratified_fold_assignment(data, k, seed);
  std::vector<Fold> folds(static_cast<std::size_t>(k));
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<std::size_t> train_rows;
    for (std::size_t r = 0; r < assignment.size(); ++r)
      (assignment[r] == f ? folds[f].validation_rows : train_rows).push_back(r);
    folds[f].train = data.subset(train_rows);
    folds[f].validation = data.subset(folds[f].validation_rows);
  }
  return folds;
}

std::pair<MultiSourceDataset, MultiSourceDataset> holdout_from_source(
    const MultiSourceDataset& data, std::string_view source, std::size_t n_test,
    std::uint64_t seed) {
  auto rows = data.rows_of_source(source);
  if (n_test > rows.size())
    throw DataError("source '" + std::string(source) + "' has " + std::to_string(rows.size()) +
                    " rows, cannot hold out " + std::to_string(n_test));
  CounterRng rng(seed, "holdout/" + std::string(source));
  rng.shuffle(rows);
  std::vector<bool> is_test(data.size(), false);
  for (std::size_t i = 0; i < n_test; ++i) is_test[rows[i]] = true;
  std::vector<std::size_t> train_rows, test_rows;
  for (std::size_t r = 0; r < data.size(); ++r) (is_test[r] ? test_rows : train_rows).push_back(r);
  return {data.subset(train_rows), data.subset(test_rows)};
}

}  // namespace lvfuse
