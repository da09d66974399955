#include <doctest.h>

#include <cmath>

#include "lvfuse/error.hpp"
#include "lvfuse/gp.hpp"
#include "lvfuse/optimize.hpp"
#include "test_support.hpp"

using namespace lvfuse;

namespace {

MixedDesign numeric_design(const Eigen::MatrixXd& x) {
  MixedDesign d;
  d.numeric = x;
  d.latent.resize(x.rows(), 0);
  return d;
}

// Independent dense evaluation: explicit inverse, no Cholesky.
struct DenseOracle {
  double mu, sigma2, nll;
  Eigen::MatrixXd cinv;
};

DenseOracle dense(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& phi,
                  double nugget) {
  const auto n = x.rows();
  Eigen::MatrixXd c(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      double s = 0;
      for (Eigen::Index k = 0; k < x.cols(); ++k) s += phi(k) * std::pow(x(i, k) - x(j, k), 2);
      c(i, j) = std::exp(-s) + (i == j ? nugget : 0.0);
    }
  DenseOracle o;
  o.cinv = c.inverse();
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(n);
  o.mu = one.dot(o.cinv * y) / one.dot(o.cinv * one);
  const Eigen::VectorXd r = y - o.mu * one;
  o.sigma2 = r.dot(o.cinv * r) / static_cast<double>(n);
  o.nll = 0.5 * static_cast<double>(n) * std::log(2 * M_PI * o.sigma2) + 0.5 * std::log(c.determinant()) +
          0.5 * static_cast<double>(n);
  return o;
}

MultiSourceDataset sine_data(int n, std::uint64_t seed) {
  CounterRng rng(seed, "test/sine");
  Eigen::MatrixXd x(n, 1);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = rng.uniform(0, 6);
    y(i) = std::sin(x(i, 0)) + 0.3 * x(i, 0);
  }
  return testing::make_dataset(x, std::vector<int>(static_cast<std::size_t>(n), 0), y);
}

}  // namespace

TEST_CASE("profile MLE on the nugget-only system") {
  // Two points far apart: C ~ (1 + nugget) I, so mu = mean and sigma2 = var / (1 + nugget).
  Eigen::MatrixXd x(2, 1);
  x << 0, 100;
  const Eigen::Vector2d y(-1, 1);
  CorrelationSystem sys = corr_matrix(numeric_design(x), Lengthscales(Eigen::VectorXd::Ones(1)), 1e-6);
  const auto est = profile_estimates(sys.factor, y);
  CHECK(est.mu == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(est.sigma2 == doctest::Approx(1.0 / (1.0 + 1e-6)).epsilon(1e-12));
}

TEST_CASE("NLL of a single point at sigma2 = 1 equals ln(2 pi)/2 + 1/2 term") {
  // n = 1 has sigma2 = 0, so use two uncorrelated unit residuals: NLL = ln(2 pi) + 1 at nugget 0.
  Eigen::MatrixXd x(2, 1);
  x << 0, 100;
  const double nll = neg_log_likelihood(Eigen::VectorXd::Zero(1), numeric_design(x), Eigen::Vector2d(-1, 1), 0.0);
  CHECK(nll == doctest::Approx(2.8378770664093453).epsilon(1e-12));
}

TEST_CASE("NLL returns the penalty when sigma2 vanishes") {
  Eigen::MatrixXd x(3, 1);
  x << 0, 0.5, 1;
  CHECK(neg_log_likelihood(Eigen::VectorXd::Zero(1), numeric_design(x), Eigen::Vector3d(2, 2, 2), 1e-6) ==
        kLikelihoodPenalty);
}

TEST_CASE("property: Cholesky path matches a dense full-inverse oracle for n <= 5") {
  CounterRng rng(31, "test/dense");
  for (int trial = 0; trial < 40; ++trial) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.below(4));
    const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng.below(2));
    Eigen::MatrixXd x(n, m);
    Eigen::VectorXd y(n), theta(m);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index k = 0; k < m; ++k) x(i, k) = rng.uniform(0, 1);
      y(i) = rng.uniform(-2, 2);
    }
    for (Eigen::Index k = 0; k < m; ++k) theta(k) = rng.uniform(-0.5, 1.5);
    const Eigen::VectorXd phi = theta.unaryExpr([](double t) { return std::pow(10.0, t); });
    const double nugget = 1e-3;
    const auto oracle = dense(x, y, phi, nugget);
    const auto design = numeric_design(x);
    const auto sys = corr_matrix(design, Lengthscales(phi), nugget);
    REQUIRE(sys.nugget == nugget);
    const auto est = profile_estimates(sys.factor, y);
    CHECK(est.mu == doctest::Approx(oracle.mu).epsilon(1e-10));
    CHECK(est.sigma2 == doctest::Approx(oracle.sigma2).epsilon(1e-10));
    CHECK(neg_log_likelihood(theta, design, y, nugget) == doctest::Approx(oracle.nll).epsilon(1e-10));

    // Predictor at a random query.
    GPModel model;
    model.scaler.input_min = Eigen::VectorXd::Zero(m);
    model.scaler.input_max = Eigen::VectorXd::Ones(m);
    model.design = design;
    model.response = y;
    model.phi = Lengthscales(phi);
    model.nugget = nugget;
    model.finalize();
    Eigen::MatrixXd q(1, m);
    for (Eigen::Index k = 0; k < m; ++k) q(0, k) = rng.uniform(0, 1);
    Eigen::VectorXd c(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      double s = 0;
      for (Eigen::Index k = 0; k < m; ++k) s += phi(k) * std::pow(q(0, k) - x(i, k), 2);
      c(i) = std::exp(-s);
    }
    const double mean = oracle.mu + c.dot(oracle.cinv * (y - oracle.mu * Eigen::VectorXd::Ones(n)));
    const double var = oracle.sigma2 * (1.0 - c.dot(oracle.cinv * c));
    const auto p = predict_scaled(model, numeric_design(q));
    CHECK(p[0].mean == doctest::Approx(mean).epsilon(1e-10));
    CHECK(p[0].variance == doctest::Approx(std::max(var, 0.0)).epsilon(1e-8).scale(oracle.sigma2));
  }
}

TEST_CASE("property: finite-difference gradient is consistent at random theta") {
  const auto data = sine_data(12, 3);
  const auto [scaled, scaler] = standardize(data);
  const auto design = numeric_design(scaled.numeric);
  Objective f = [&](const Eigen::VectorXd& t) { return neg_log_likelihood(t, design, scaled.response, 1e-6); };
  const Box box{Eigen::VectorXd::Constant(1, -4), Eigen::VectorXd::Constant(1, 4)};
  CounterRng rng(37, "test/fd");
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd t = Eigen::VectorXd::Constant(1, rng.uniform(-1.5, 1.5));
    const auto g = central_gradient(f, t, box, QuasiNewtonOptions{}.fd_step);
    // Richardson-style reference with a much wider step.
    const double h = 1e-4;
    const Eigen::VectorXd tp = t.array() + h, tm = t.array() - h;
    const double wide = (f(tp) - f(tm)) / (2 * h);
    CHECK(g(0) == doctest::Approx(wide).epsilon(1e-4).scale(1.0));
  }
}

TEST_CASE("fit_gp interpolates training data and never reports negative variance") {
  const auto data = sine_data(15, 1);
  const auto model = fit_gp(data, {});
  const auto preds = predict(model, data.numeric);
  const double scale = data.response.cwiseAbs().maxCoeff();
  for (std::size_t i = 0; i < preds.size(); ++i) {
    CHECK(std::abs(preds[i].mean - data.response(static_cast<Eigen::Index>(i))) <= 1e-3 * scale);
    CHECK(preds[i].variance >= 0.0);
  }
  Eigen::MatrixXd grid(101, 1);
  for (int i = 0; i <= 100; ++i) grid(i, 0) = -1 + 8.0 * i / 100.0;
  for (const auto& p : predict(model, grid)) CHECK(p.variance >= 0.0);
  CHECK(model.fit.runs.size() == 8);
  for (const auto& r : model.fit.runs) CHECK(r.final_objective <= r.initial_objective);
}

TEST_CASE("fit_gp is deterministic for a fixed seed, whatever the thread count") {
  const auto data = sine_data(10, 2);
  FitOptions one;
  one.threads = 1;
  FitOptions many;
  many.threads = 4;
  const auto a = fit_gp(data, one);
  const auto b = fit_gp(data, many);
  CHECK(a.phi.values() == b.phi.values());
  CHECK(a.fit.best_objective == b.fit.best_objective);
  FitOptions other;
  other.seed = 99;
  const auto c = fit_gp(data, other);
  CHECK(c.fit.runs[0].initial_objective != a.fit.runs[0].initial_objective);
}

TEST_CASE("constant response predicts the constant") {
  const auto data = testing::make_dataset(Eigen::Vector3d(0, 1, 2), {0, 0, 0}, Eigen::Vector3d(4, 4, 4));
  const auto model = fit_gp(data, {});
  const auto p = predict(model, Eigen::MatrixXd::Constant(1, 1, 0.7));
  CHECK(p[0].mean == 4.0);
  CHECK(p[0].variance == 0.0);
}

TEST_CASE("fit_gp input errors") {
  CHECK_THROWS_AS(fit_gp(sine_data(1, 0), {}), DataError);
  FitOptions bad;
  bad.restarts = 0;
  CHECK_THROWS_AS(fit_gp(sine_data(5, 0), bad), Error);
  const auto model = fit_gp(sine_data(6, 0), {});
  CHECK_THROWS_AS(predict(model, Eigen::MatrixXd::Zero(1, 2)), DataError);
}
