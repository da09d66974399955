#include <doctest.h>

#include <cmath>

#include "lvfuse/benchmarks.hpp"
#include "lvfuse/error.hpp"
#include "lvfuse/lvgp.hpp"
#include "test_support.hpp"

using namespace lvfuse;

namespace {

// Two shifted sine sources on x in [0, 6].
MultiSourceDataset two_source(int per_source, std::uint64_t seed) {
  CounterRng rng(seed, "test/two-source");
  const int n = 2 * per_source;
  Eigen::MatrixXd x(n, 1);
  Eigen::VectorXd y(n);
  std::vector<int> src;
  for (int i = 0; i < n; ++i) {
    const int s = i < per_source ? 0 : 1;
    x(i, 0) = rng.uniform(0, 6);
    y(i) = std::sin(x(i, 0)) + 0.5 * s;
    src.push_back(s);
  }
  return testing::make_dataset(x, src, y, {"a", "b"});
}

LVGPModel tiny_model(const MultiSourceDataset& data) {
  FitOptions opts;
  opts.restarts = 2;
  return fit_lvgp(data, opts);
}

}  // namespace

TEST_CASE("parameterization anchors level 1 and level 2") {
  CategoricalVariable v{"s", {"a", "b", "c", "d"}};
  const LatentParameterization layout({v}, 2);
  CHECK(layout.latent_size() == 5);
  CHECK(layout.size() == 7);
  Eigen::VectorXd p(7);
  p << 0, 0, 0.7, 1, 2, -1, -2;
  const auto tables = layout.unpack(p);
  REQUIRE(tables.size() == 1);
  CHECK(tables[0].coords(0, 0) == 0.0);
  CHECK(tables[0].coords(0, 1) == 0.0);
  CHECK(tables[0].coords(1, 0) == 0.7);
  CHECK(tables[0].coords(1, 1) == 0.0);
  CHECK(tables[0].coords(3, 1) == -2.0);

  const auto box = layout.box(-4, 4);
  CHECK(box.lower(2) == 0.0);  // z1 of level 2 is non-negative
  CHECK(box.upper(3) == 3.0);
  CHECK(box.lower(3) == -3.0);

  SUBCASE("one and two levels") {
    CHECK(LatentParameterization({CategoricalVariable{"s", {"a"}}}, 1).latent_size() == 0);
    CHECK(LatentParameterization({CategoricalVariable{"s", {"a", "b"}}}, 1).latent_size() == 1);
  }
  SUBCASE("starts stay in the box") {
    for (int r = 0; r < 8; ++r) CHECK(box.contains(layout.initial(0, r, -4, 4)));
  }
  CHECK_THROWS_AS(layout.unpack(Eigen::VectorXd::Zero(3)), DataError);
}

TEST_CASE("fitted latents satisfy the anchoring and stay in the box") {
  const auto data = two_source(8, 4);
  const auto model = tiny_model(data);
  const auto& coords = model.latents.back().coords;
  CHECK(coords(0, 0) == 0.0);
  CHECK(coords(0, 1) == 0.0);
  CHECK(coords(1, 1) == 0.0);
  CHECK(coords(1, 0) >= 0.0);
  CHECK(coords.cwiseAbs().maxCoeff() <= 3.0);
}

TEST_CASE("single-level source reduces exactly to fit_gp") {
  const auto base = two_source(8, 5);
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < 8; ++i) rows.push_back(i);
  auto data = base.subset(rows).without_unused_levels();
  REQUIRE(data.schema.source.levels.size() == 1);
  const auto gp = fit_gp(data, {});
  const auto lv = fit_lvgp(data, {});
  CHECK(lv.core.fit.best_objective == doctest::Approx(gp.fit.best_objective).epsilon(1e-8));
  Eigen::MatrixXd grid(7, 1);
  for (int i = 0; i < 7; ++i) grid(i, 0) = i;
  const auto pg = predict(gp, grid);
  std::vector<MixedInput> q;
  for (int i = 0; i < 7; ++i) q.push_back({Eigen::VectorXd::Constant(1, i), {"a"}});
  const auto pl = predict_lvgp(lv, q);
  for (int i = 0; i < 7; ++i) {
    CHECK(pl[static_cast<std::size_t>(i)].mean == doctest::Approx(pg[static_cast<std::size_t>(i)].mean).epsilon(1e-8));
    CHECK(pl[static_cast<std::size_t>(i)].variance ==
          doctest::Approx(pg[static_cast<std::size_t>(i)].variance).epsilon(1e-8).scale(1e-8));
  }
}

TEST_CASE("lvgp interpolates and is seed-deterministic") {
  const auto data = two_source(8, 6);
  const auto a = tiny_model(data);
  const auto b = tiny_model(data);
  CHECK(a.latents.back().coords == b.latents.back().coords);
  CHECK(a.core.fit.best_objective == b.core.fit.best_objective);
  const auto p = predict_lvgp(a, data);
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(std::abs(p[i].mean - data.response(static_cast<Eigen::Index>(i))) < 1e-3);
    CHECK(p[i].variance >= 0.0);
  }
}

TEST_CASE("fit and predict errors") {
  auto data = two_source(5, 7);
  data.schema.source.levels.push_back("unused");
  CHECK_THROWS_AS(fit_lvgp(data, {}), DataError);

  const auto model = tiny_model(two_source(5, 7));
  CHECK_THROWS_AS(predict_lvgp(model, {MixedInput{Eigen::VectorXd::Zero(1), {"zzz"}}}), UnknownLevelError);
  CHECK_THROWS_AS(predict_lvgp(model, {MixedInput{Eigen::VectorXd::Zero(2), {"a"}}}), DataError);
}

TEST_CASE("latent_map and dissimilarity") {
  LVGPModel model;
  model.schema.source = {"source", {"ground", "p1", "p2"}};
  model.latents = {{"source", {"ground", "p1", "p2"}, Eigen::MatrixX2d(3, 2)}};
  model.latents[0].coords << 0, 0, 3, 0, 0, 3;
  const auto map = latent_map(model, "source", std::string("ground"));
  const auto d = dissimilarity(map);
  CHECK(d[0].second == 0.0);
  CHECK(d[1].second == doctest::Approx(0.7071067811865475).epsilon(1e-15));
  CHECK(d[2].second == doctest::Approx(0.7071067811865475).epsilon(1e-15));
  // Recentering on p1: D(p2) = |(−3,3)| / (3 sqrt 2) = 1.
  const auto moved = recenter(map, "p1");
  CHECK(moved.coords(1, 0) == 0.0);
  CHECK(dissimilarity(moved)[2].second == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(latent_map(model, "source", std::string("nope")), UnknownLevelError);
  CHECK_THROWS_AS(latent_map(model, "x"), DataError);
  CHECK_THROWS_AS(dissimilarity(latent_map(model, "source")), DataError);
}

TEST_CASE("filter_sources keeps sources within the threshold") {
  const auto [train, test] = benchmarks::generate_parabola(0);
  // D = |z| / (3 sqrt 2): p1 0.1, p2 0.03, p3 0.2.
  const double s = 3.0 * std::sqrt(2.0);
  LatentMap map{"source", {"ground", "p1", "p2", "p3"}, Eigen::MatrixX2d(4, 2), std::string("ground"), {}};
  map.coords << 0, 0, 0.1 * s, 0, 0, 0.03 * s, -0.2 * s, 0;
  const auto kept = filter_sources(train, map, 0.05);
  CHECK(kept.schema.source.levels == std::vector<std::string>{"ground", "p2"});
  CHECK(kept.size() == 13);
  CHECK(filter_sources(train, map, 0.0).schema.source.levels == std::vector<std::string>{"ground"});
  CHECK(filter_sources(train, map, 10.0).size() == train.size());
  CHECK_THROWS_AS(filter_sources(train, map, -0.1), DataError);
  map.variable = "other";
  CHECK_THROWS_AS(filter_sources(train, map, 0.1), DataError);
}

TEST_CASE("split_source relabels half the rows") {
  const auto [train, test] = benchmarks::generate_parabola(0);
  const auto split = split_source(train, "p1", 3);
  CHECK(split.schema.source.levels == std::vector<std::string>{"ground", "p1_1", "p2", "p3", "p1_2"});
  CHECK(split.source_counts() == std::vector<std::size_t>{3, 5, 10, 10, 5});
  CHECK(split.numeric == train.numeric);
  CHECK(split_source(train, "p1", 3).levels == split.levels);
  CHECK_THROWS_AS(split_source(train, "nope", 0), UnknownLevelError);
  CHECK_THROWS_AS(split_source(split, "p1_", 0), UnknownLevelError);
}
