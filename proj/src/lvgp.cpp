#include "lvfuse/lvgp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lvfuse/error.hpp"
#include "lvfuse/random.hpp"

namespace lvfuse {

namespace {

const double kDissimilarityScale = kLatentBound * std::sqrt(2.0);

std::size_t free_coordinates(std::size_t levels) { return levels < 2 ? 0 : 2 * levels - 3; }

void keep_used_source_levels(MultiSourceDataset& data) {
  const auto col = static_cast<Eigen::Index>(data.schema.source_index());
  auto& var = data.schema.source;
  std::vector<int> remap(var.levels.size(), -1);
  std::vector<std::string> kept;
  for (std::size_t l = 0; l < var.levels.size(); ++l) {
    bool used = (data.levels.col(col).array() == static_cast<int>(l)).any();
    if (!used) continue;
    remap[l] = static_cast<int>(kept.size());
    kept.push_back(var.levels[l]);
  }
  var.levels = std::move(kept);
  for (Eigen::Index r = 0; r < data.levels.rows(); ++r)
    data.levels(r, col) = remap[static_cast<std::size_t>(data.levels(r, col))];
}

}  // namespace

LatentParameterization::LatentParameterization(std::vector<CategoricalVariable> variables,
                                               std::size_t numeric_dims, double bound)
    : variables_(std::move(variables)), numeric_dims_(numeric_dims), bound_(bound) {
  for (const auto& v : variables_) latent_size_ += free_coordinates(v.levels.size());
}

LatentConfig LatentParameterization::unpack(const Eigen::VectorXd& params) const {
  if (static_cast<std::size_t>(params.size()) != size())
    throw DataError("parameter vector has wrong length");
  LatentConfig out;
  auto k = static_cast<Eigen::Index>(numeric_dims_);
  for (const auto& v : variables_) {
    LatentTable table{v.name, v.levels, Eigen::MatrixX2d::Zero(static_cast<Eigen::Index>(v.levels.size()), 2)};
    const auto levels = static_cast<Eigen::Index>(v.levels.size());
    if (levels >= 2) table.coords(1, 0) = params(k++);
    for (Eigen::Index l = 2; l < levels; ++l) {
      table.coords(l, 0) = params(k++);
      table.coords(l, 1) = params(k++);
    }
    out.push_back(std::move(table));
  }
  return out;
}

Box LatentParameterization::box(double theta_lo, double theta_hi) const {
  Box b{Eigen::VectorXd(size()), Eigen::VectorXd(size())};
  const auto m = static_cast<Eigen::Index>(numeric_dims_);
  b.lower.head(m).setConstant(theta_lo);
  b.upper.head(m).setConstant(theta_hi);
  Eigen::Index k = m;
  for (const auto& v : variables_) {
    if (v.levels.size() < 2) continue;
    b.lower(k) = 0.0;
    b.upper(k++) = bound_;
    for (std::size_t l = 2; l < v.levels.size(); ++l)
      for (int c = 0; c < 2; ++c) {
        b.lower(k) = -bound_;
        b.upper(k++) = bound_;
      }
  }
  return b;
}

Eigen::VectorXd LatentParameterization::initial(std::uint64_t seed, int restart, double theta_lo,
                                                double theta_hi) const {
  const auto m = static_cast<Eigen::Index>(numeric_dims_);
  Eigen::VectorXd x(size());
  // Same theta stream as fit_gp, so a model without latent freedom retraces the GP fit.
  x.head(m) = detail::uniform_start(seed, "gp/theta", restart, Eigen::VectorXd::Constant(m, theta_lo),
                                    Eigen::VectorXd::Constant(m, theta_hi));
  CounterRng rng(seed, "lvgp/latent/restart" + std::to_string(restart));
  Eigen::Index k = m;
  for (const auto& v : variables_) {
    if (v.levels.size() < 2) continue;
    x(k++) = rng.uniform(0.0, 1.0);
    for (std::size_t l = 2; l < v.levels.size(); ++l) {
      x(k++) = rng.uniform(-1.0, 1.0);
      x(k++) = rng.uniform(-1.0, 1.0);
    }
  }
  return x;
}

double lvgp_neg_log_likelihood(const Eigen::VectorXd& params, const LatentParameterization& layout,
                               const MultiSourceDataset& scaled, double nugget) {
  MixedDesign design;
  design.numeric = scaled.numeric;
  design.latent = embed_levels(scaled.levels, layout.unpack(params));
  const auto m = static_cast<Eigen::Index>(layout.numeric_dims());
  return neg_log_likelihood(params.head(m), design, scaled.response, nugget);
}

LVGPModel fit_lvgp(const MultiSourceDataset& data, const FitOptions& options) {
  if (data.size() < 2) throw DataError("fit_lvgp needs at least 2 rows");
  if (options.restarts < 1) throw DataError("restarts must be >= 1");
  const auto variables = data.schema.categorical_variables();
  for (std::size_t j = 0; j < variables.size(); ++j) {
    const auto& var = variables[j];
    if (var.levels.empty()) throw DataError("categorical variable '" + var.name + "' has no levels");
    std::vector<std::size_t> counts(var.levels.size(), 0);
    for (Eigen::Index r = 0; r < data.levels.rows(); ++r)
      ++counts[static_cast<std::size_t>(data.levels(r, static_cast<Eigen::Index>(j)))];
    for (std::size_t l = 0; l < counts.size(); ++l)
      if (counts[l] == 0)
        throw DataError("level '" + var.levels[l] + "' of '" + var.name + "' has no rows");
  }

  auto [scaled, scaler] = standardize(data);
  const LatentParameterization layout(variables, static_cast<std::size_t>(data.numeric.cols()),
                                      options.latent_bound);

  LVGPModel model;
  model.schema = data.schema;
  model.training_levels = data.levels;
  GPModel& core = model.core;
  core.numeric_inputs = data.schema.numeric_inputs;
  core.response_column = data.schema.response_column;
  core.scaler = scaler;
  core.design.numeric = scaled.numeric;
  core.response = scaled.response;
  core.nugget = options.nugget;
  core.fit.seed = options.seed;
  core.fit.restarts = options.restarts;

  Eigen::VectorXd best_params;
  if (scaler.constant_response) {
    best_params = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout.size()));
  } else {
    const Box box = layout.box(options.log10_phi_min, options.log10_phi_max);
    const double nugget = options.nugget;
    const MultiSourceDataset& training = scaled;
    Objective objective = [&](const Eigen::VectorXd& p) {
      return lvgp_neg_log_likelihood(p, layout, training, nugget);
    };
    std::vector<Eigen::VectorXd> starts;
    for (int r = 0; r < options.restarts; ++r)
      starts.push_back(layout.initial(options.seed, r, options.log10_phi_min, options.log10_phi_max));
    const auto runs = minimize_multistart(objective, starts, box, options.optimizer,
                                          detail::resolve_threads(options));
    const std::size_t best = best_result(runs);
    if (!(runs[best].value < kLikelihoodPenalty))
      throw NumericalError("LVGP is unfittable: every restart failed to factor the correlation matrix");
    for (const auto& r : runs)
      core.fit.runs.push_back({r.initial_value, r.value, r.iterations, r.converged});
    core.fit.best_restart = best;
    core.fit.best_objective = runs[best].value;
    best_params = runs[best].x;
  }

  const auto m = static_cast<Eigen::Index>(layout.numeric_dims());
  model.latents = layout.unpack(best_params);
  core.phi = Lengthscales::from_log10(best_params.head(m));
  core.design.latent = embed_levels(model.training_levels, model.latents);
  core.finalize();
  return model;
}

std::vector<Prediction> predict_lvgp(const LVGPModel& model, const std::vector<MixedInput>& points) {
  const auto m = model.core.design.numeric.cols();
  const auto q = static_cast<Eigen::Index>(model.latents.size());
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd x(n, m);
  Eigen::MatrixXi codes(n, q);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = points[static_cast<std::size_t>(i)];
    if (p.numeric.size() != m)
      throw DataError("predict_lvgp: expected " + std::to_string(m) + " numeric inputs");
    if (static_cast<Eigen::Index>(p.levels.size()) != q)
      throw DataError("predict_lvgp: expected " + std::to_string(q) + " levels per point");
    x.row(i) = p.numeric.transpose();
    for (Eigen::Index j = 0; j < q; ++j)
      codes(i, j) = model.schema.categorical(static_cast<std::size_t>(j))
                        .index_of(p.levels[static_cast<std::size_t>(j)]);
  }
  MixedDesign design;
  design.numeric = model.core.scaler.scale_inputs(x);
  design.latent = embed_levels(codes, model.latents);
  return predict_scaled(model.core, design);
}

std::vector<Prediction> predict_lvgp(const LVGPModel& model, const MultiSourceDataset& data) {
  if (data.schema.numeric_inputs != model.schema.numeric_inputs)
    throw SchemaError("numeric inputs of the data do not match the model");
  const auto q = model.schema.categorical_count();
  if (data.schema.categorical_count() != q)
    throw SchemaError("categorical inputs of the data do not match the model");
  std::vector<MixedInput> points(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    points[i].numeric = data.numeric.row(r).transpose();
    for (std::size_t j = 0; j < q; ++j) {
      const auto& var = data.schema.categorical(j);
      if (var.name != model.schema.categorical(j).name)
        throw SchemaError("categorical column '" + var.name + "' does not match the model");
      points[i].levels.push_back(var.levels[static_cast<std::size_t>(data.levels(r, static_cast<Eigen::Index>(j)))]);
    }
  }
  return predict_lvgp(model, points);
}

LatentMap latent_map(const LVGPModel& model, std::string_view variable,
                     std::optional<std::string> reference) {
  const auto it = std::find_if(model.latents.begin(), model.latents.end(),
                               [&](const LatentTable& t) { return t.variable == variable; });
  if (it == model.latents.end())
    throw DataError("'" + std::string(variable) + "' is not a categorical variable of the model");
  LatentMap map{it->variable, it->levels, it->coords, std::nullopt, {}};
  if (reference) return recenter(std::move(map), *reference);
  return map;
}

LatentMap recenter(LatentMap map, const std::string& reference) {
  const auto it = std::find(map.levels.begin(), map.levels.end(), reference);
  if (it == map.levels.end()) throw UnknownLevelError(map.variable, reference);
  const auto ref = static_cast<Eigen::Index>(it - map.levels.begin());
  const Eigen::RowVector2d origin = map.coords.row(ref);
  map.coords.rowwise() -= origin;
  map.reference = reference;
  map.dissimilarity.resize(map.levels.size());
  for (std::size_t l = 0; l < map.levels.size(); ++l)
    map.dissimilarity[l] = map.coords.row(static_cast<Eigen::Index>(l)).norm() / kDissimilarityScale;
  return map;
}

std::vector<std::pair<std::string, double>> dissimilarity(const LatentMap& map) {
  if (!map.reference) throw DataError("dissimilarity needs a reference level");
  const auto ref = std::find(map.levels.begin(), map.levels.end(), *map.reference) - map.levels.begin();
  const Eigen::RowVector2d z_ref = map.coords.row(ref);
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t l = 0; l < map.levels.size(); ++l)
    out.emplace_back(map.levels[l],
                     (map.coords.row(static_cast<Eigen::Index>(l)) - z_ref).norm() / kDissimilarityScale);
  return out;
}

MultiSourceDataset filter_sources(const MultiSourceDataset& data, const LatentMap& map,
                                  double threshold) {
  if (!(threshold >= 0.0)) throw DataError("filter threshold must be >= 0");
  if (map.variable != data.schema.source.name)
    throw DataError("latent map is for '" + map.variable + "', not the source column '" +
                    data.schema.source.name + "'");
  const auto d = dissimilarity(map);
  std::vector<bool> keep(data.schema.source.levels.size(), false);
  for (std::size_t l = 0; l < keep.size(); ++l) {
    const auto& level = data.schema.source.levels[l];
    const auto it = std::find_if(d.begin(), d.end(), [&](const auto& e) { return e.first == level; });
    if (it == d.end()) throw UnknownLevelError(map.variable, level);
    keep[l] = level == *map.reference || it->second <= threshold;
  }
  std::vector<std::size_t> rows;
  const auto col = static_cast<Eigen::Index>(data.schema.source_index());
  for (std::size_t r = 0; r < data.size(); ++r)
    if (keep[static_cast<std::size_t>(data.levels(static_cast<Eigen::Index>(r), col))]) rows.push_back(r);
  auto out = data.subset(rows);
  keep_used_source_levels(out);
  return out;
}

MultiSourceDataset split_source(const MultiSourceDataset& data, std::string_view source,
                                std::uint64_t seed) {
  const int code = data.schema.source.index_of(source);
  auto rows = data.rows_of_source(code);
  if (rows.size() < 2)
    throw DataError("source '" + std::string(source) + "' needs at least 2 rows to split");
  const std::string first = std::string(source) + "_1";
  const std::string second = std::string(source) + "_2";
  if (data.schema.source.find(first) || data.schema.source.find(second))
    throw DataError("split labels for '" + std::string(source) + "' already exist");
  CounterRng rng(seed, "split/" + std::string(source));
  rng.shuffle(rows);
  MultiSourceDataset out = data;
  out.schema.source.levels[static_cast<std::size_t>(code)] = first;
  const int second_code = out.schema.source.register_level(second);
  const auto col = static_cast<Eigen::Index>(data.schema.source_index());
  for (std::size_t i = (rows.size() + 1) / 2; i < rows.size(); ++i)
    out.levels(static_cast<Eigen::Index>(rows[i]), col) = second_code;
  return out;
}

}  // namespace lvfuse
