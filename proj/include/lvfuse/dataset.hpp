#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace lvfuse {

/// A categorical input and its ordered level registry. Level order matters:
/// the first two levels anchor the latent embedding.
struct CategoricalVariable {
  std::string name;
  std::vector<std::string> levels;

  std::optional<int> find(std::string_view level) const;
  /// Index of `level`, throwing UnknownLevelError when absent.
  int index_of(std::string_view level) const;
  /// Index of `level`, registering it at the end when absent.
  int register_level(std::string_view level);

  bool operator==(const CategoricalVariable&) const = default;
};

/// Column roles of a multi-source table: numeric inputs, categorical inputs,
/// the source label (one more categorical) and the scalar response.
struct VariableSchema {
  std::vector<std::string> numeric_inputs;
  std::vector<CategoricalVariable> categorical_inputs;
  CategoricalVariable source;
  std::string response_column;

  /// Categorical inputs followed by the source variable. Column j of
  /// MultiSourceDataset::levels refers to entry j of this list.
  std::vector<CategoricalVariable> categorical_variables() const;
  std::size_t categorical_count() const { return categorical_inputs.size() + 1; }
  std::size_t source_index() const { return categorical_inputs.size(); }

  CategoricalVariable& categorical(std::size_t j);
  const CategoricalVariable& categorical(std::size_t j) const;

  /// Throws SchemaError on duplicate or empty column names.
  void validate() const;

  bool operator==(const VariableSchema&) const = default;
};

/// Parses the key = value schema config. Recognised keys: numeric_inputs,
/// categorical_inputs, source_column, response_column (comma-separated
/// lists where plural) and optional `levels.<column>` declaring level order.
/// '#' starts a comment.
VariableSchema parse_schema(std::string_view text);
VariableSchema load_schema(const std::filesystem::path& path);
std::string format_schema(const VariableSchema& schema);
void save_schema(const VariableSchema& schema, const std::filesystem::path& path);

/// Column-oriented table. Rows keep file order.
struct MultiSourceDataset {
  VariableSchema schema;
  Eigen::MatrixXd numeric;   // n x m
  Eigen::MatrixXi levels;    // n x (q + 1), codes into schema.categorical(j)
  Eigen::VectorXd response;  // n

  std::size_t size() const { return static_cast<std::size_t>(response.size()); }
  bool empty() const { return response.size() == 0; }

  Eigen::VectorXi source_codes() const { return levels.col(schema.source_index()); }

  /// Rows in the given order, schema unchanged.
  MultiSourceDataset subset(const std::vector<std::size_t>& rows) const;
  std::vector<std::size_t> rows_of_source(int code) const;
  std::vector<std::size_t> rows_of_source(std::string_view level) const;
  /// Row count per source level, in registry order.
  std::vector<std::size_t> source_counts() const;

  /// Drops registry levels that no row uses, remapping codes; order of the
  /// surviving levels is kept.
  MultiSourceDataset without_unused_levels() const;
};

/// Reads a header-first, comma-separated file. Levels not declared in the
/// schema are registered in order of first appearance.
MultiSourceDataset load_csv(const std::filesystem::path& path, VariableSchema schema);
MultiSourceDataset parse_csv(std::string_view text, VariableSchema schema);
void save_csv(const MultiSourceDataset& data, const std::filesystem::path& path);

/// Splits a line on commas, trimming surrounding whitespace.
std::vector<std::string> split_csv_line(std::string_view line);
double parse_number(std::string_view cell);
/// Shortest-safe round-trip text for a double (17 significant digits, '.' decimal).
std::string format_number(double v);

/// Affine scalers fitted on training data. Numeric columns map to [0, 1]
/// by min/max; the response maps to zero mean and unit population variance.
struct Standardizer {
  Eigen::VectorXd input_min;
  Eigen::VectorXd input_max;
  double response_mean = 0.0;
  double response_std = 1.0;
  bool constant_response = false;

  static Standardizer fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& response);

  Eigen::MatrixXd scale_inputs(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd unscale_inputs(const Eigen::MatrixXd& u) const;
  Eigen::VectorXd scale_response(const Eigen::VectorXd& y) const;
  double unscale_response(double v) const;
  Eigen::VectorXd unscale_response(const Eigen::VectorXd& v) const;
  double unscale_variance(double var) const;

  bool operator==(const Standardizer&) const = default;
};

std::pair<MultiSourceDataset, Standardizer> standardize(const MultiSourceDataset& train);

struct Fold {
  MultiSourceDataset train;
  MultiSourceDataset validation;
  std::vector<std::size_t> validation_rows;  // indices into the input
};

/// Per source, rows are shuffled by the seed and dealt round-robin; the deal
/// pointer carries over between sources so fold sizes differ by at most one.
std::vector<std::size_t> stratified_fold_assignment(const MultiSourceDataset& data, int k,
                                                    std::uint64_t seed);
std::vector<Fold> stratified_kfold(const MultiSourceDataset& data, int k, std::uint64_t seed);

/// Moves `n_test` randomly chosen rows of one source into a test set.
std::pair<MultiSourceDataset, MultiSourceDataset> holdout_from_source(
    const MultiSourceDataset& data, std::string_view source, std::size_t n_test,
    std::uint64_t seed);

}  // namespace lvfuse
