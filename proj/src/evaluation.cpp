#include "lvfuse/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "lvfuse/error.hpp"

namespace lvfuse {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  return out;
}

const GPModel& core_of(const AnyModel& model) {
  return std::visit(
      [](const auto& m) -> const GPModel& {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, GPModel>)
          return m;
        else
          return m.core;
      },
      model);
}

double mean_defined(const std::vector<double>& values) {
  double sum = 0.0;
  int count = 0;
  for (double v : values)
    if (std::isfinite(v)) {
      sum += v;
      ++count;
    }
  return count ? sum / count : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

std::string_view to_string(ModelKind kind) { return kind == ModelKind::gp ? "gp" : "lvgp"; }

ModelKind parse_model_kind(std::string_view text) {
  if (text == "gp") return ModelKind::gp;
  if (text == "lvgp") return ModelKind::lvgp;
  throw DataError("unknown model kind '" + std::string(text) + "' (expected gp or lvgp)");
}

AnyModel fit_model(ModelKind kind, const MultiSourceDataset& data, const FitOptions& options) {
  if (kind == ModelKind::gp) return fit_gp(data, options);
  return fit_lvgp(data, options);
}

ModelKind kind_of(const AnyModel& model) {
  return std::holds_alternative<GPModel>(model) ? ModelKind::gp : ModelKind::lvgp;
}

std::vector<Prediction> predict_dataset(const AnyModel& model, const MultiSourceDataset& data) {
  if (const auto* gp = std::get_if<GPModel>(&model)) return predict(*gp, data.numeric);
  return predict_lvgp(std::get<LVGPModel>(model), data);
}

double nrmse(const Eigen::VectorXd& truth, const Eigen::VectorXd& pred) {
  if (truth.size() == 0) throw DataError("nrmse of an empty vector");
  if (truth.size() != pred.size()) throw DataError("nrmse: length mismatch");
  const double range = truth.maxCoeff() - truth.minCoeff();
  if (!(range > 0.0)) throw DataError("nrmse undefined: truth has zero range");
  const double rmse = std::sqrt((truth - pred).squaredNorm() / static_cast<double>(truth.size()));
  return rmse / range;
}

EvalReport evaluate(const AnyModel& model, const MultiSourceDataset& data, std::string split) {
  const auto preds = predict_dataset(model, data);
  EvalReport report;
  report.split = std::move(split);
  Eigen::VectorXd mean(static_cast<Eigen::Index>(preds.size()));
  for (std::size_t i = 0; i < preds.size(); ++i) {
    mean(static_cast<Eigen::Index>(i)) = preds[i].mean;
    report.parity.push_back({report.split, data.response(static_cast<Eigen::Index>(i)), preds[i].mean,
                             preds[i].std()});
  }
  report.nrmse = nrmse(data.response, mean);
  return report;
}

EvalReport run_cv(const MultiSourceDataset& data, ModelKind kind, int k, std::uint64_t seed,
                  const FitOptions& options) {
  const auto folds = stratified_kfold(data, k, seed);
  EvalReport report;
  report.split = "cv";
  std::vector<double> train_scores, cv_scores;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const auto& fold = folds[f];
    const std::string where = "fold " + std::to_string(f) + ": ";
    AnyModel model;
    try {
      model = fit_model(kind, fold.train, options);
    } catch (const NumericalError& e) {
      throw NumericalError(where + e.what());
    } catch (const DataError& e) {
      throw DataError(where + e.what());
    }
    FoldResult result;
    result.fold = static_cast<int>(f);
    result.n_train = fold.train.size();
    result.n_validation = fold.validation.size();

    const auto train_pred = predict_dataset(model, fold.train);
    Eigen::VectorXd train_mean(static_cast<Eigen::Index>(train_pred.size()));
    for (std::size_t i = 0; i < train_pred.size(); ++i) train_mean(static_cast<Eigen::Index>(i)) = train_pred[i].mean;
    result.train_nrmse = nrmse(fold.train.response, train_mean);

    const auto val_pred = predict_dataset(model, fold.validation);
    Eigen::VectorXd val_mean(static_cast<Eigen::Index>(val_pred.size()));
    for (std::size_t i = 0; i < val_pred.size(); ++i) {
      val_mean(static_cast<Eigen::Index>(i)) = val_pred[i].mean;
      report.parity.push_back({"cv", fold.validation.response(static_cast<Eigen::Index>(i)),
                               val_pred[i].mean, val_pred[i].std()});
    }
    const auto& truth = fold.validation.response;
    result.validation_nrmse = truth.maxCoeff() > truth.minCoeff()
                                  ? nrmse(truth, val_mean)
                                  : std::numeric_limits<double>::quiet_NaN();
    train_scores.push_back(result.train_nrmse);
    cv_scores.push_back(result.validation_nrmse);
    report.folds.push_back(result);
  }
  report.mean_train_nrmse = mean_defined(train_scores);
  report.mean_cv_nrmse = mean_defined(cv_scores);
  report.nrmse = report.mean_cv_nrmse;
  return report;
}

void parity_export(const EvalReport& report, const std::filesystem::path& path) {
  if (report.parity.empty()) throw DataError("parity export of an empty report");
  auto out = open_out(path);
  out << "split,truth,mean,std\n";
  for (const auto& r : report.parity)
    out << r.split << ',' << format_number(r.truth) << ',' << format_number(r.mean) << ','
        << format_number(r.std) << '\n';
}

std::vector<ParityRecord> read_parity(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::string line;
  std::getline(in, line);
  if (split_csv_line(line) != std::vector<std::string>{"split", "truth", "mean", "std"})
    throw SchemaError("not a parity file: '" + path.string() + "'");
  std::vector<ParityRecord> out;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 4) throw ParseError(out.size() + 1, "expected 4 cells");
    out.push_back({cells[0], parse_number(cells[1]), parse_number(cells[2]), parse_number(cells[3])});
  }
  return out;
}

void cv_report_export(const EvalReport& report, const std::filesystem::path& path) {
  auto out = open_out(path);
  // Training NRMSE: each fold's model scored on that fold's own training rows, averaged over folds.
  out << "fold,n_train,n_validation,train_nrmse,validation_nrmse\n";
  for (const auto& f : report.folds)
    out << f.fold << ',' << f.n_train << ',' << f.n_validation << ',' << format_number(f.train_nrmse)
        << ',' << format_number(f.validation_nrmse) << '\n';
  out << "mean,,," << format_number(report.mean_train_nrmse) << ','
      << format_number(report.mean_cv_nrmse) << '\n';
}

SurfaceSpec parse_surface_spec(std::string_view text) {
  SurfaceSpec spec;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "surface spec line " + std::to_string(line_no) + ": ";
    if (eq == std::string_view::npos) throw SchemaError(where + "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    try {
      if (key == "sweep") {
        const auto cells = split_csv_line(value);
        if (cells.size() != 4) throw SchemaError("sweep needs <name>, <min>, <max>, <steps>");
        const double steps = parse_number(cells[3]);
        if (steps != std::floor(steps)) throw SchemaError("sweep steps must be an integer");
        spec.sweeps.push_back({cells[0], parse_number(cells[1]), parse_number(cells[2]), static_cast<int>(steps)});
      } else if (key.starts_with("fixed.")) {
        spec.fixed_numeric[key.substr(6)] = parse_number(value);
      } else if (key.starts_with("level.")) {
        spec.fixed_levels[key.substr(6)] = value;
      } else {
        throw SchemaError("unknown key '" + key + "'");
      }
    } catch (const DataError& e) {
      throw SchemaError(where + e.what());
    }
  }
  return spec;
}

SurfaceSpec load_surface_spec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_surface_spec(ss.str());
}

std::vector<SurfacePoint> surface_grid(const AnyModel& model, const SurfaceSpec& spec) {
  const GPModel& core = core_of(model);
  const auto& names = core.numeric_inputs;
  if (spec.sweeps.empty() || spec.sweeps.size() > 2)
    throw SchemaError("surface needs one or two swept variables");
  std::vector<std::size_t> swept_cols;
  for (const auto& s : spec.sweeps) {
    if (s.steps < 2) throw SchemaError("sweep over '" + s.variable + "' needs at least 2 steps");
    const auto it = std::find(names.begin(), names.end(), s.variable);
    if (it == names.end()) throw SchemaError("'" + s.variable + "' is not a numeric input of the model");
    swept_cols.push_back(static_cast<std::size_t>(it - names.begin()));
  }
  if (swept_cols.size() == 2 && swept_cols[0] == swept_cols[1])
    throw SchemaError("swept variables must be distinct");
  for (const auto& [name, value] : spec.fixed_numeric)
    if (std::find(names.begin(), names.end(), name) == names.end())
      throw SchemaError("'" + name + "' is not a numeric input of the model");

  // Unswept, unfixed numerics sit at the middle of their training range.
  Eigen::VectorXd base(static_cast<Eigen::Index>(names.size()));
  for (std::size_t c = 0; c < names.size(); ++c) {
    const auto ci = static_cast<Eigen::Index>(c);
    const auto fixed = spec.fixed_numeric.find(names[c]);
    base(ci) = fixed != spec.fixed_numeric.end()
                   ? fixed->second
                   : 0.5 * (core.scaler.input_min(ci) + core.scaler.input_max(ci));
  }

  std::vector<std::string> levels;
  if (const auto* lv = std::get_if<LVGPModel>(&model)) {
    for (std::size_t j = 0; j < lv->schema.categorical_count(); ++j) {
      const auto& var = lv->schema.categorical(j);
      const auto it = spec.fixed_levels.find(var.name);
      if (it == spec.fixed_levels.end()) throw SchemaError("surface spec fixes no level for '" + var.name + "'");
      var.index_of(it->second);
      levels.push_back(it->second);
    }
  }

  auto grid_value = [](const Sweep& s, int i) {
    return s.min + (s.max - s.min) * static_cast<double>(i) / static_cast<double>(s.steps - 1);
  };
  const int outer = spec.sweeps[0].steps;
  const int inner = spec.sweeps.size() == 2 ? spec.sweeps[1].steps : 1;
  std::vector<SurfacePoint> points;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(outer) * inner, base.size());
  for (int i = 0; i < outer; ++i)
    for (int j = 0; j < inner; ++j) {
      const Eigen::Index r = static_cast<Eigen::Index>(i) * inner + j;
      x.row(r) = base.transpose();
      SurfacePoint p;
      p.swept.push_back(grid_value(spec.sweeps[0], i));
      x(r, static_cast<Eigen::Index>(swept_cols[0])) = p.swept.back();
      if (inner > 1) {
        p.swept.push_back(grid_value(spec.sweeps[1], j));
        x(r, static_cast<Eigen::Index>(swept_cols[1])) = p.swept.back();
      }
      points.push_back(std::move(p));
    }

  std::vector<Prediction> preds;
  if (const auto* gp = std::get_if<GPModel>(&model)) {
    preds = predict(*gp, x);
  } else {
    std::vector<MixedInput> inputs(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index r = 0; r < x.rows(); ++r) inputs[static_cast<std::size_t>(r)] = {x.row(r).transpose(), levels};
    preds = predict_lvgp(std::get<LVGPModel>(model), inputs);
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    points[i].mean = preds[i].mean;
    points[i].std = preds[i].std();
  }
  return points;
}

void surface_export(const AnyModel& model, const SurfaceSpec& spec, const std::filesystem::path& path) {
  const auto grid = surface_grid(model, spec);
  auto out = open_out(path);
  for (const auto& s : spec.sweeps) out << s.variable << ',';
  out << "mean,std\n";
  for (const auto& p : grid) {
    for (double v : p.swept) out << format_number(v) << ',';
    out << format_number(p.mean) << ',' << format_number(p.std) << '\n';
  }
}

}  // namespace lvfuse
