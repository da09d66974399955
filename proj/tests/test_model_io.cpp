#include <doctest.h>

#include <fstream>

#include "lvfuse/benchmarks.hpp"
#include "lvfuse/error.hpp"
#include "lvfuse/model_io.hpp"
#include "test_support.hpp"

using namespace lvfuse;

namespace {

FitOptions quick() {
  FitOptions o;
  o.restarts = 2;
  return o;
}

void check_same_predictions(const AnyModel& a, const AnyModel& b, const MultiSourceDataset& data) {
  const auto pa = predict_dataset(a, data);
  const auto pb = predict_dataset(b, data);
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i].mean == doctest::Approx(pb[i].mean).epsilon(1e-12));
    CHECK(pa[i].variance == doctest::Approx(pb[i].variance).epsilon(1e-9).scale(1e-9));
  }
}

}  // namespace

TEST_CASE("lvgp model survives save and load") {
  const auto dir = testing::scratch_dir("model_io_lvgp");
  const auto [train, test] = benchmarks::generate_parabola(0);
  const AnyModel model = fit_model(ModelKind::lvgp, train, quick());
  save_model(model, dir / "model.json");
  const auto loaded = load_model(dir / "model.json");
  CHECK(kind_of(loaded) == ModelKind::lvgp);
  const auto& lv = std::get<LVGPModel>(loaded);
  const auto& orig = std::get<LVGPModel>(model);
  CHECK(lv.schema == orig.schema);
  CHECK(lv.latents.back().coords == orig.latents.back().coords);
  CHECK(lv.core.fit.best_objective == orig.core.fit.best_objective);
  CHECK(lv.core.fit.runs.size() == 2);
  check_same_predictions(model, loaded, test);
}

TEST_CASE("gp model survives a serialize round-trip") {
  const auto [train, test] = benchmarks::generate_ackley(0);
  const AnyModel model = fit_model(ModelKind::gp, train.subset({0, 1, 2, 3, 4, 5, 6, 7, 8, 9}), quick());
  const auto text = serialize_model(model);
  CHECK(text.find("\"lvfuse-model\"") != std::string::npos);
  const auto loaded = deserialize_model(text);
  CHECK(kind_of(loaded) == ModelKind::gp);
  check_same_predictions(model, loaded, test);
  CHECK(serialize_model(loaded) == text);
}

TEST_CASE("malformed model files are rejected") {
  CHECK_THROWS_AS(deserialize_model("not json"), SchemaError);
  CHECK_THROWS_AS(deserialize_model("{\"format\": \"other\"}"), SchemaError);
  CHECK_THROWS_AS(deserialize_model("{\"format\": \"lvfuse-model\", \"version\": 99}"), SchemaError);
  CHECK_THROWS_AS(deserialize_model("{\"format\": \"lvfuse-model\", \"version\": 1}"), SchemaError);
  CHECK_THROWS_AS(load_model("/nonexistent/model.json"), DataError);
}
