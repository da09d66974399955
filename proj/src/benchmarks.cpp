#include "lvfuse/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "lvfuse/error.hpp"
#include "lvfuse/random.hpp"

namespace lvfuse::benchmarks {

namespace {

struct Row {
  std::vector<double> x;
  int source;
  double y;
};

MultiSourceDataset build(const VariableSchema& schema, const std::vector<Row>& rows) {
  MultiSourceDataset data;
  data.schema = schema;
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto m = static_cast<Eigen::Index>(schema.numeric_inputs.size());
  data.numeric.resize(n, m);
  data.levels.resize(n, 1);
  data.response.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    for (Eigen::Index c = 0; c < m; ++c) data.numeric(i, c) = r.x[static_cast<std::size_t>(c)];
    data.levels(i, 0) = r.source;
    data.response(i) = r.y;
  }
  return data;
}

CategoricalVariable source_variable() {
  CategoricalVariable v{"source", {}};
  for (auto s : kSources) v.levels.emplace_back(s);
  return v;
}

}  // namespace

std::size_t source_index(std::string_view source) {
  const auto it = std::find(kSources.begin(), kSources.end(), source);
  if (it == kSources.end()) throw UnknownLevelError("source", std::string(source));
  return static_cast<std::size_t>(it - kSources.begin());
}

ParabolaParams parabola_params(std::string_view source) {
  switch (source_index(source)) {
    case 0: return {1.0, 2.0, 0.0, 0.0};
    case 1: return {1.0, 2.0, 8.0, 0.0};
    case 2: return {1.0, 2.0, 0.0, 100.0};
    default: return {1.0, 2.0, 12.0, 120.0};
  }
}

double parabola_value(std::string_view source, double x) {
  const auto p = parabola_params(source);
  return (x + p.x_shift - p.a) * (x + p.x_shift - p.b) + p.y_shift;
}

double ackley_value(std::string_view source, double x, double y, const AckleyParams& p) {
  const double radial = -p.a * std::exp(-p.b * std::sqrt(0.5 * (x * x + y * y)));
  const double periodic = std::exp(0.5 * (std::cos(p.c * x) + std::cos(p.c * y)));
  switch (source_index(source)) {
    case 0: return radial - periodic + p.a + std::numbers::e;
    case 1: return radial + 10.0;
    case 2: return periodic + 5.0;
    default: return 0.25 * radial - 0.75 * periodic + p.a + std::numbers::e;
  }
}

VariableSchema parabola_schema() {
  VariableSchema s;
  s.numeric_inputs = {"x"};
  s.source = source_variable();
  s.response_column = "y";
  return s;
}

VariableSchema ackley_schema() {
  VariableSchema s;
  s.numeric_inputs = {"x", "y"};
  s.source = source_variable();
  s.response_column = "z";
  return s;
}

std::pair<MultiSourceDataset, MultiSourceDataset> generate_parabola(std::uint64_t seed,
                                                                    const ParabolaOptions& options) {
  std::vector<Row> train, test;
  for (std::size_t s = 0; s < kSources.size(); ++s) {
    const auto source = kSources[s];
    const std::size_t n_train = options.counts.train[s];
    CounterRng train_rng(seed, "parabola/train/" + std::string(source));
    for (std::size_t i = 0; i < n_train; ++i) {
      double x;
      if (options.design == TrainingDesign::uniform)
        x = train_rng.uniform(options.lower, options.upper);
      else if (n_train == 1)
        x = 0.5 * (options.lower + options.upper);
      else
        x = options.lower + (options.upper - options.lower) * static_cast<double>(i) /
                                static_cast<double>(n_train - 1);
      train.push_back({{x}, static_cast<int>(s), parabola_value(source, x)});
    }
    CounterRng test_rng(seed, "parabola/test/" + std::string(source));
    for (std::size_t i = 0; i < options.counts.test[s]; ++i) {
      const double x = test_rng.uniform(options.lower, options.upper);
      test.push_back({{x}, static_cast<int>(s), parabola_value(source, x)});
    }
  }
  const auto schema = parabola_schema();
  return {build(schema, train), build(schema, test)};
}

std::pair<MultiSourceDataset, MultiSourceDataset> generate_ackley(std::uint64_t seed,
                                                                  const AckleyOptions& options) {
  if (!(options.params.a > 0 && options.params.b > 0))
    throw DataError("Ackley parameters a and b must be positive");
  std::vector<Row> train, test;
  auto sample = [&](std::vector<Row>& out, const std::string& stream, std::size_t s, std::size_t count) {
    CounterRng rng(seed, stream + std::string(kSources[s]));
    for (std::size_t i = 0; i < count; ++i) {
      const double x = rng.uniform(options.lower, options.upper);
      const double y = rng.uniform(options.lower, options.upper);
      out.push_back({{x, y}, static_cast<int>(s), ackley_value(kSources[s], x, y, options.params)});
    }
  };
  for (std::size_t s = 0; s < kSources.size(); ++s) {
    sample(train, "ackley/train/", s, options.counts.train[s]);
    sample(test, "ackley/test/", s, options.counts.test[s]);
  }
  const auto schema = ackley_schema();
  return {build(schema, train), build(schema, test)};
}

}  // namespace lvfuse::benchmarks
