#include "lvfuse/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lvfuse/error.hpp"

namespace lvfuse {

namespace {

using nlohmann::json;

json to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

template <typename Matrix>
json rows_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename Matrix>
Matrix rows_from(const json& j, Eigen::Index cols) {
  Matrix m(static_cast<Eigen::Index>(j.size()), cols);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const auto& row = j.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw SchemaError("model file: ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = row.at(static_cast<std::size_t>(c)).template get<typename Matrix::Scalar>();
  }
  return m;
}

json variable_json(const CategoricalVariable& v) { return {{"name", v.name}, {"levels", v.levels}}; }

CategoricalVariable variable_from(const json& j) {
  return {j.at("name").get<std::string>(), j.at("levels").get<std::vector<std::string>>()};
}

json core_json(const GPModel& m) {
  json fit = {{"seed", m.fit.seed},
              {"restarts", m.fit.restarts},
              {"best_objective", m.fit.best_objective},
              {"best_restart", m.fit.best_restart},
              {"runs", json::array()}};
  for (const auto& r : m.fit.runs)
    fit["runs"].push_back({{"initial_objective", r.initial_objective},
                           {"final_objective", r.final_objective},
                           {"iterations", r.iterations},
                           {"converged", r.converged}});
  return {{"standardizer",
           {{"input_min", to_json(m.scaler.input_min)},
            {"input_max", to_json(m.scaler.input_max)},
            {"response_mean", m.scaler.response_mean},
            {"response_std", m.scaler.response_std},
            {"constant_response", m.scaler.constant_response}}},
          {"hyperparameters",
           {{"mu", m.mu}, {"sigma2", m.sigma2}, {"phi", to_json(m.phi.values())}, {"nugget", m.nugget}}},
          {"training", {{"inputs", rows_to_json(m.design.numeric)}, {"response", to_json(m.response)}}},
          {"fit", fit}};
}

void read_core(const json& doc, GPModel& m) {
  const auto& s = doc.at("standardizer");
  m.scaler.input_min = vector_from(s.at("input_min"));
  m.scaler.input_max = vector_from(s.at("input_max"));
  m.scaler.response_mean = s.at("response_mean").get<double>();
  m.scaler.response_std = s.at("response_std").get<double>();
  m.scaler.constant_response = s.at("constant_response").get<bool>();
  const auto& h = doc.at("hyperparameters");
  m.mu = h.at("mu").get<double>();
  m.sigma2 = h.at("sigma2").get<double>();
  m.phi = Lengthscales(vector_from(h.at("phi")));
  m.nugget = h.at("nugget").get<double>();
  const auto& t = doc.at("training");
  m.design.numeric = rows_from<Eigen::MatrixXd>(t.at("inputs"), m.phi.size());
  m.response = vector_from(t.at("response"));
  if (m.response.size() != m.design.numeric.rows()) throw SchemaError("model file: training size mismatch");
  const auto& f = doc.at("fit");
  m.fit.seed = f.at("seed").get<std::uint64_t>();
  m.fit.restarts = f.at("restarts").get<int>();
  m.fit.best_objective = f.at("best_objective").get<double>();
  m.fit.best_restart = f.at("best_restart").get<std::size_t>();
  for (const auto& r : f.at("runs"))
    m.fit.runs.push_back({r.at("initial_objective").get<double>(), r.at("final_objective").get<double>(),
                          r.at("iterations").get<int>(), r.at("converged").get<bool>()});
}

// Rebuilds the factor and weights from stored hyperparameters without re-profiling.
void restore_factor(GPModel& m) {
  CorrelationSystem sys;
  if (!try_corr_matrix(m.design, m.phi, m.nugget, sys))
    throw NumericalError("model file: stored correlation matrix does not factor");
  m.factor = std::move(sys.factor);
  m.weights = m.factor.solve((m.response.array() - m.mu).matrix());
}

}  // namespace

std::string serialize_model(const AnyModel& model) {
  json doc = {{"format", "lvfuse-model"}, {"version", kModelFormatVersion}};
  if (const auto* gp = std::get_if<GPModel>(&model)) {
    doc["kind"] = "gp";
    doc["schema"] = {{"numeric_inputs", gp->numeric_inputs}, {"response_column", gp->response_column}};
    doc.update(core_json(*gp));
  } else {
    const auto& lv = std::get<LVGPModel>(model);
    doc["kind"] = "lvgp";
    json cats = json::array();
    for (const auto& c : lv.schema.categorical_inputs) cats.push_back(variable_json(c));
    doc["schema"] = {{"numeric_inputs", lv.schema.numeric_inputs},
                     {"categorical_inputs", cats},
                     {"source", variable_json(lv.schema.source)},
                     {"response_column", lv.schema.response_column}};
    doc.update(core_json(lv.core));
    json latents = json::array();
    for (const auto& t : lv.latents)
      latents.push_back({{"variable", t.variable}, {"levels", t.levels}, {"z", rows_to_json(t.coords)}});
    doc["latents"] = latents;
    doc["training"]["levels"] = rows_to_json(lv.training_levels);
  }
  return doc.dump(1);
}

AnyModel deserialize_model(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (doc.value("format", "") != "lvfuse-model") throw SchemaError("not an lvfuse model file");
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion)
      throw SchemaError("unsupported model format version " + std::to_string(version));
    const auto kind = parse_model_kind(doc.at("kind").get<std::string>());
    const auto& schema = doc.at("schema");
    if (kind == ModelKind::gp) {
      GPModel m;
      m.numeric_inputs = schema.at("numeric_inputs").get<std::vector<std::string>>();
      m.response_column = schema.at("response_column").get<std::string>();
      read_core(doc, m);
      m.design.latent.resize(m.design.numeric.rows(), 0);
      restore_factor(m);
      return m;
    }
    LVGPModel lv;
    lv.schema.numeric_inputs = schema.at("numeric_inputs").get<std::vector<std::string>>();
    for (const auto& c : schema.at("categorical_inputs")) lv.schema.categorical_inputs.push_back(variable_from(c));
    lv.schema.source = variable_from(schema.at("source"));
    lv.schema.response_column = schema.at("response_column").get<std::string>();
    lv.schema.validate();
    for (const auto& t : doc.at("latents")) {
      LatentTable table{t.at("variable").get<std::string>(), t.at("levels").get<std::vector<std::string>>(), {}};
      table.coords = rows_from<Eigen::MatrixX2d>(t.at("z"), 2);
      if (table.coords.rows() != static_cast<Eigen::Index>(table.levels.size()))
        throw SchemaError("model file: latent table size mismatch for '" + table.variable + "'");
      lv.latents.push_back(std::move(table));
    }
    if (lv.latents.size() != lv.schema.categorical_count())
      throw SchemaError("model file: latent tables do not match categorical variables");
    GPModel& core = lv.core;
    core.numeric_inputs = lv.schema.numeric_inputs;
    core.response_column = lv.schema.response_column;
    read_core(doc, core);
    lv.training_levels = rows_from<Eigen::MatrixXi>(doc.at("training").at("levels"),
                                                    static_cast<Eigen::Index>(lv.latents.size()));
    core.design.latent = embed_levels(lv.training_levels, lv.latents);
    restore_factor(core);
    return lv;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const AnyModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << serialize_model(model) << '\n';
}

AnyModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_model(ss.str());
}

}  // namespace lvfuse
