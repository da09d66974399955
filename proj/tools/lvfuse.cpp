// lvfuse command-line front end.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lvfuse/benchmarks.hpp"
#include "lvfuse/dataset.hpp"
#include "lvfuse/error.hpp"
#include "lvfuse/evaluation.hpp"
#include "lvfuse/lvgp.hpp"
#include "lvfuse/model_io.hpp"

namespace fs = std::filesystem;
using namespace lvfuse;

namespace {

struct CommonFit {
  std::uint64_t seed = 0;
  int restarts = 8;
  double nugget = kDefaultNugget;

  FitOptions options() const {
    FitOptions o;
    o.seed = seed;
    o.restarts = restarts;
    o.nugget = nugget;
    return o;
  }
};

void add_fit_flags(CLI::App* cmd, CommonFit& fit) {
  cmd->add_option("--seed", fit.seed, "Random seed")->capture_default_str();
  cmd->add_option("--restarts", fit.restarts, "Optimizer restarts")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--nugget", fit.nugget, "Diagonal nugget")->capture_default_str()->check(CLI::NonNegativeNumber);
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  return out;
}

void print_fit(const FitSummary& fit) {
  std::cout << "best objective " << format_number(fit.best_objective) << " (restart " << fit.best_restart << ")\n";
  for (std::size_t r = 0; r < fit.runs.size(); ++r) {
    const auto& run = fit.runs[r];
    std::cout << "  restart " << r << ": " << format_number(run.initial_objective) << " -> "
              << format_number(run.final_objective) << " in " << run.iterations << " iterations"
              << (run.converged ? "" : " (not converged)") << '\n';
  }
}

const FitSummary& summary_of(const AnyModel& model) {
  if (const auto* gp = std::get_if<GPModel>(&model)) return gp->fit;
  return std::get<LVGPModel>(model).core.fit;
}

// ---- benchmark

int cmd_benchmark(const std::string& family, std::uint64_t seed, const fs::path& out_dir,
                  std::optional<std::size_t> ground_train, const std::string& design) {
  std::pair<MultiSourceDataset, MultiSourceDataset> sets;
  if (family == "parabola") {
    benchmarks::ParabolaOptions opts;
    if (ground_train) opts.counts.train[0] = *ground_train;
    opts.design = design == "uniform" ? benchmarks::TrainingDesign::uniform : benchmarks::TrainingDesign::grid;
    sets = benchmarks::generate_parabola(seed, opts);
  } else if (family == "ackley") {
    benchmarks::AckleyOptions opts;
    if (ground_train) opts.counts.train[0] = *ground_train;
    sets = benchmarks::generate_ackley(seed, opts);
  } else {
    throw DataError("unknown benchmark family '" + family + "' (expected parabola or ackley)");
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  save_csv(sets.first, out_dir / "train.csv");
  save_csv(sets.second, out_dir / "test.csv");
  save_schema(sets.first.schema, out_dir / "schema.cfg");
  std::cout << "train.csv: " << sets.first.size() << " rows\n"
            << "test.csv: " << sets.second.size() << " rows\n";
  return 0;
}

// ---- fit

int cmd_fit(const std::string& kind_text, const fs::path& data_path, const fs::path& schema_path,
            const CommonFit& fit, const fs::path& out) {
  const auto kind = parse_model_kind(kind_text);
  const auto data = load_csv(data_path, load_schema(schema_path));
  if (kind == ModelKind::gp) {
    std::string ignored;
    for (const auto& var : data.schema.categorical_variables())
      ignored += (ignored.empty() ? "" : ", ") + var.name;
    std::cerr << "warning: gp ignores categorical columns: " << ignored << '\n';
  }
  const auto model = fit_model(kind, data, fit.options());
  save_model(model, out);
  std::cout << to_string(kind) << " fitted on " << data.size() << " rows\n";
  print_fit(summary_of(model));
  return 0;
}

// ---- predict

struct QueryTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (header[c] == name) return c;
    throw SchemaError("input is missing column '" + name + "'");
  }
};

QueryTable read_queries(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  QueryTable t;
  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + path.string() + "' is empty");
  t.header = split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != t.header.size())
      throw ParseError(t.rows.size() + 1, "expected " + std::to_string(t.header.size()) + " cells");
    t.rows.push_back(std::move(cells));
  }
  if (t.rows.empty()) throw DataError("'" + path.string() + "' has no data rows");
  return t;
}

Eigen::MatrixXd numeric_block(const QueryTable& t, const std::vector<std::string>& names) {
  std::vector<std::size_t> cols;
  for (const auto& n : names) cols.push_back(t.column(n));
  Eigen::MatrixXd x(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c) {
      try {
        x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = parse_number(t.rows[r][cols[c]]);
      } catch (const ParseError& e) {
        throw ParseError(r + 1, e.what());
      }
    }
  return x;
}

int cmd_predict(const fs::path& model_path, const fs::path& input, const fs::path& out_path) {
  const auto model = load_model(model_path);
  const auto table = read_queries(input);
  std::vector<Prediction> preds;
  if (const auto* gp = std::get_if<GPModel>(&model)) {
    preds = predict(*gp, numeric_block(table, gp->numeric_inputs));
  } else {
    const auto& lv = std::get<LVGPModel>(model);
    const auto x = numeric_block(table, lv.schema.numeric_inputs);
    std::vector<std::size_t> cat_cols;
    for (const auto& var : lv.schema.categorical_variables()) cat_cols.push_back(table.column(var.name));
    std::vector<MixedInput> points;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      MixedInput p{x.row(static_cast<Eigen::Index>(r)).transpose(), {}};
      for (auto c : cat_cols) p.levels.push_back(table.rows[r][c]);
      points.push_back(std::move(p));
    }
    preds = predict_lvgp(lv, points);
  }
  auto out = open_out(out_path);
  out << "mean,std\n";
  for (const auto& p : preds) out << format_number(p.mean) << ',' << format_number(p.std()) << '\n';
  std::cout << "wrote " << preds.size() << " predictions\n";
  return 0;
}

// ---- cv

int cmd_cv(const std::string& kind_text, const fs::path& data_path, const fs::path& schema_path, int k,
           const CommonFit& fit, const fs::path& out_dir) {
  const auto kind = parse_model_kind(kind_text);
  const auto data = load_csv(data_path, load_schema(schema_path));
  const auto report = run_cv(data, kind, k, fit.seed, fit.options());
  fs::create_directories(out_dir);
  cv_report_export(report, out_dir / "cv_report.csv");
  parity_export(report, out_dir / "parity.csv");
  std::cout << "mean training NRMSE (per-fold average) " << format_number(report.mean_train_nrmse) << '\n'
            << "mean CV NRMSE " << format_number(report.mean_cv_nrmse) << '\n';
  return 0;
}

// ---- latent

int cmd_latent(const fs::path& model_path, std::string variable, const std::string& reference,
               const fs::path& out_path) {
  const auto model = load_model(model_path);
  const auto* lv = std::get_if<LVGPModel>(&model);
  if (!lv) throw DataError("model is a gp and has no latent coordinates");
  if (variable.empty()) variable = lv->schema.source.name;
  const auto map = latent_map(*lv, variable,
                              reference.empty() ? std::nullopt : std::optional<std::string>{reference});
  // Default reference: the variable's first level.
  const auto centred = map.reference ? map : recenter(map, map.levels.front());
  auto out = open_out(out_path);
  out << "variable,level,z1,z2,D\n";
  for (std::size_t l = 0; l < centred.levels.size(); ++l) {
    const auto i = static_cast<Eigen::Index>(l);
    out << centred.variable << ',' << centred.levels[l] << ',' << format_number(centred.coords(i, 0)) << ','
        << format_number(centred.coords(i, 1)) << ',' << format_number(centred.dissimilarity[l]) << '\n';
    std::cout << centred.levels[l] << ": D = " << format_number(centred.dissimilarity[l]) << '\n';
  }
  return 0;
}

LatentMap read_latent_csv(const fs::path& path) {
  const auto t = read_queries(path);
  const auto cv = t.column("variable"), cl = t.column("level"), c1 = t.column("z1"), c2 = t.column("z2");
  LatentMap map;
  map.coords.resize(static_cast<Eigen::Index>(t.rows.size()), 2);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (r == 0) map.variable = t.rows[r][cv];
    if (t.rows[r][cv] != map.variable) throw SchemaError("latent file mixes several variables");
    map.levels.push_back(t.rows[r][cl]);
    map.coords(static_cast<Eigen::Index>(r), 0) = parse_number(t.rows[r][c1]);
    map.coords(static_cast<Eigen::Index>(r), 1) = parse_number(t.rows[r][c2]);
  }
  return map;
}

// ---- filter

int cmd_filter(const fs::path& data_path, const fs::path& schema_path, const fs::path& latent_path,
               const std::string& reference, double threshold, const fs::path& out_path) {
  const auto data = load_csv(data_path, load_schema(schema_path));
  const auto map = recenter(read_latent_csv(latent_path), reference);
  const auto kept = filter_sources(data, map, threshold);
  save_csv(kept, out_path);
  const auto counts = kept.source_counts();
  std::cout << "retained " << kept.size() << " of " << data.size() << " rows\n";
  for (std::size_t s = 0; s < counts.size(); ++s)
    std::cout << "  " << kept.schema.source.levels[s] << ": " << counts[s] << '\n';
  return 0;
}

// ---- surface

int cmd_surface(const fs::path& model_path, const fs::path& spec_path, const fs::path& out_path) {
  const auto model = load_model(model_path);
  const auto spec = load_surface_spec(spec_path);
  surface_export(model, spec, out_path);
  std::cout << "wrote " << surface_grid(model, spec).size() << " grid points\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-source data fusion with latent-variable Gaussian processes"};
  app.require_subcommand(1);

  // benchmark
  std::string family, design = "grid";
  std::uint64_t bench_seed = 0;
  fs::path bench_out = ".";
  std::optional<std::size_t> ground_train;
  auto* bench = app.add_subcommand("benchmark", "Generate a synthetic multi-source benchmark");
  bench->add_option("family", family, "parabola or ackley")->required();
  bench->add_option("--seed", bench_seed, "Random seed")->capture_default_str();
  bench->add_option("--out", bench_out, "Output directory")->capture_default_str();
  bench->add_option("--ground-train", ground_train, "Ground-source training rows");
  bench->add_option("--design", design, "Parabola training design")
      ->check(CLI::IsMember({"grid", "uniform"}))
      ->capture_default_str();

  // fit
  std::string fit_kind;
  fs::path fit_data, fit_schema, fit_out = "model.json";
  CommonFit fit_opts;
  auto* fit = app.add_subcommand("fit", "Fit a gp or lvgp model");
  fit->add_option("kind", fit_kind, "gp or lvgp")->required();
  fit->add_option("--data", fit_data, "Training CSV")->required();
  fit->add_option("--schema", fit_schema, "Schema config")->required();
  fit->add_option("--out", fit_out, "Model file")->capture_default_str();
  add_fit_flags(fit, fit_opts);

  // predict
  fs::path pred_model, pred_data, pred_out = "predictions.csv";
  auto* pred = app.add_subcommand("predict", "Predict mean and std at new points");
  pred->add_option("--model", pred_model, "Model file")->required();
  pred->add_option("--data", pred_data, "Query CSV")->required();
  pred->add_option("--out", pred_out, "Output CSV")->capture_default_str();

  // cv
  std::string cv_kind;
  fs::path cv_data, cv_schema, cv_out = ".";
  int folds = 5;
  CommonFit cv_opts;
  auto* cv = app.add_subcommand("cv", "Stratified k-fold cross validation");
  cv->add_option("kind", cv_kind, "gp or lvgp")->required();
  cv->add_option("--data", cv_data, "Data CSV")->required();
  cv->add_option("--schema", cv_schema, "Schema config")->required();
  cv->add_option("-k,--folds", folds, "Number of folds")->capture_default_str();
  cv->add_option("--out", cv_out, "Output directory")->capture_default_str();
  add_fit_flags(cv, cv_opts);

  // latent
  fs::path lat_model, lat_out = "latent.csv";
  std::string lat_var, lat_ref;
  auto* lat = app.add_subcommand("latent", "Export latent coordinates and dissimilarities");
  lat->add_option("--model", lat_model, "Model file")->required();
  lat->add_option("--variable", lat_var, "Categorical variable (default: source column)");
  lat->add_option("--reference", lat_ref, "Reference level (default: first level)");
  lat->add_option("--out", lat_out, "Output CSV")->capture_default_str();

  // filter
  fs::path flt_data, flt_schema, flt_latent, flt_out = "filtered.csv";
  std::string flt_ref;
  double threshold = std::numeric_limits<double>::infinity();
  auto* flt = app.add_subcommand("filter", "Keep sources within a dissimilarity threshold");
  flt->add_option("--data", flt_data, "Data CSV")->required();
  flt->add_option("--schema", flt_schema, "Schema config")->required();
  flt->add_option("--latent", flt_latent, "Latent CSV from the latent command")->required();
  flt->add_option("--reference", flt_ref, "Reference source")->required();
  flt->add_option("--threshold", threshold, "Maximum dissimilarity D")->required();
  flt->add_option("--out", flt_out, "Output CSV")->capture_default_str();

  // surface
  fs::path srf_model, srf_spec, srf_out = "surface.csv";
  auto* srf = app.add_subcommand("surface", "Export a prediction surface over a grid");
  srf->add_option("--model", srf_model, "Model file")->required();
  srf->add_option("--spec", srf_spec, "Surface spec")->required();
  srf->add_option("--out", srf_out, "Output CSV")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*bench) return cmd_benchmark(family, bench_seed, bench_out, ground_train, design);
    if (*fit) return cmd_fit(fit_kind, fit_data, fit_schema, fit_opts, fit_out);
    if (*pred) return cmd_predict(pred_model, pred_data, pred_out);
    if (*cv) return cmd_cv(cv_kind, cv_data, cv_schema, folds, cv_opts, cv_out);
    if (*lat) return cmd_latent(lat_model, lat_var, lat_ref, lat_out);
    if (*flt) return cmd_filter(flt_data, flt_schema, flt_latent, flt_ref, threshold, flt_out);
    if (*srf) return cmd_surface(srf_model, srf_spec, srf_out);
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
