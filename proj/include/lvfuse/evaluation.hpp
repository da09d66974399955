#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "lvfuse/dataset.hpp"
#include "lvfuse/gp.hpp"
#include "lvfuse/lvgp.hpp"

namespace lvfuse {

enum class ModelKind { gp, lvgp };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

using AnyModel = std::variant<GPModel, LVGPModel>;

AnyModel fit_model(ModelKind kind, const MultiSourceDataset& data, const FitOptions& options);
ModelKind kind_of(const AnyModel& model);
/// Predictions for every row of `data` (responses ignored).
std::vector<Prediction> predict_dataset(const AnyModel& model, const MultiSourceDataset& data);

/// RMSE divided by the range of `truth`. Throws DataError on empty input,
/// length mismatch or zero range.
double nrmse(const Eigen::VectorXd& truth, const Eigen::VectorXd& pred);

struct ParityRecord {
  std::string split;
  double truth = 0.0;
  double mean = 0.0;
  double std = 0.0;
};

struct FoldResult {
  int fold = 0;
  std::size_t n_train = 0;
  std::size_t n_validation = 0;
  double train_nrmse = 0.0;
  double validation_nrmse = 0.0;  // NaN when the fold's truth range is zero
};

struct EvalReport {
  std::string split;
  double nrmse = 0.0;
  std::vector<ParityRecord> parity;
  // Cross-validation only.
  std::vector<FoldResult> folds;
  double mean_train_nrmse = 0.0;
  double mean_cv_nrmse = 0.0;
};

/// Scores `model` on every row of `data`.
EvalReport evaluate(const AnyModel& model, const MultiSourceDataset& data, std::string split);

/// Stratified k-fold CV. Each fold fits on its training rows and is scored on
/// both its training rows and its validation rows; means are taken over
/// folds (folds with an undefined NRMSE are skipped). The report's `nrmse`
/// equals mean_cv_nrmse and `parity` holds the out-of-fold predictions.
EvalReport run_cv(const MultiSourceDataset& data, ModelKind kind, int k, std::uint64_t seed,
                  const FitOptions& options);

/// CSV: split,truth,mean,std
void parity_export(const EvalReport& report, const std::filesystem::path& path);
std::vector<ParityRecord> read_parity(const std::filesystem::path& path);

/// CSV: fold,n_train,n_validation,train_nrmse,validation_nrmse with a final
/// "mean" row.
void cv_report_export(const EvalReport& report, const std::filesystem::path& path);

struct Sweep {
  std::string variable;
  double min = 0.0;
  double max = 1.0;
  int steps = 2;
};

/// Grid over one or two numeric inputs; every other input held fixed.
struct SurfaceSpec {
  std::vector<Sweep> sweeps;
  std::map<std::string, double> fixed_numeric;
  std::map<std::string, std::string> fixed_levels;  // categorical name -> level
};

/// Key = value text:
///   sweep = <numeric>, <min>, <max>, <steps>     (once or twice)
///   fixed.<numeric> = <value>
///   level.<categorical> = <level>
SurfaceSpec parse_surface_spec(std::string_view text);
SurfaceSpec load_surface_spec(const std::filesystem::path& path);

struct SurfacePoint {
  std::vector<double> swept;
  double mean = 0.0;
  double std = 0.0;
};

/// Grid in row-major order: the first sweep varies slowest.
std::vector<SurfacePoint> surface_grid(const AnyModel& model, const SurfaceSpec& spec);
/// CSV columns: swept variable names, mean, std.
void surface_export(const AnyModel& model, const SurfaceSpec& spec, const std::filesystem::path& path);

}  // namespace lvfuse
