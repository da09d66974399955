#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "lvfuse/optimize.hpp"

using namespace lvfuse;

namespace {

double rosenbrock(const Eigen::VectorXd& x) {
  double s = 0;
  for (Eigen::Index i = 0; i + 1 < x.size(); ++i)
    s += 100 * std::pow(x(i + 1) - x(i) * x(i), 2) + std::pow(1 - x(i), 2);
  return s;
}

Box box_of(Eigen::Index n, double lo, double hi) {
  return {Eigen::VectorXd::Constant(n, lo), Eigen::VectorXd::Constant(n, hi)};
}

}  // namespace

TEST_CASE("unconstrained minimum inside the box") {
  QuasiNewtonOptions opts;
  opts.max_iterations = 500;
  const auto r = minimize_bounded(rosenbrock, Eigen::Vector2d(-1.2, 1.0), box_of(2, -5, 5), opts);
  CHECK(r.value < 1e-6);
  CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(r.value <= r.initial_value);
}

TEST_CASE("minimum on an active bound") {
  // (x - 3)^2 + (y + 2)^2 on [0,1]^2 -> (1, 0)
  Objective f = [](const Eigen::VectorXd& x) { return std::pow(x(0) - 3, 2) + std::pow(x(1) + 2, 2); };
  const auto r = minimize_bounded(f, Eigen::Vector2d(0.5, 0.5), box_of(2, 0, 1));
  CHECK(r.converged);
  CHECK(r.x(0) == 1.0);
  CHECK(r.x(1) == 0.0);
}

TEST_CASE("start outside the box is projected") {
  Objective f = [](const Eigen::VectorXd& x) { return x.squaredNorm(); };
  const auto r = minimize_bounded(f, Eigen::Vector3d(10, -10, 0.5), box_of(3, -1, 1));
  CHECK(r.x.cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("penalty plateaus do not crash the search") {
  Objective f = [](const Eigen::VectorXd& x) { return x(0) > 0.5 ? 1e10 : std::pow(x(0) - 0.4, 2); };
  const auto r = minimize_bounded(f, Eigen::VectorXd::Constant(1, 0.0), box_of(1, -1, 1));
  CHECK(r.value < 1e-6);
}

TEST_CASE("central_gradient agrees with the analytic gradient and respects bounds") {
  Objective f = [](const Eigen::VectorXd& x) { return std::sin(x(0)) * std::exp(x(1)); };
  const Eigen::Vector2d x(0.3, -0.2);
  const auto g = central_gradient(f, x, box_of(2, -1, 1), 1e-6);
  CHECK(g(0) == doctest::Approx(std::cos(0.3) * std::exp(-0.2)).epsilon(1e-8));
  CHECK(g(1) == doctest::Approx(std::sin(0.3) * std::exp(-0.2)).epsilon(1e-8));
  // At the upper bound the stencil stays inside.
  Objective guarded = [](const Eigen::VectorXd& x) { return x(0) > 1.0 ? NAN : x(0) * x(0); };
  const auto gb = central_gradient(guarded, Eigen::VectorXd::Constant(1, 1.0), box_of(1, -1, 1), 1e-6);
  CHECK(gb(0) == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("multistart keeps start order and is thread-count independent") {
  Objective f = [](const Eigen::VectorXd& x) { return std::cos(3 * x(0)) + 0.1 * x(0) * x(0); };
  std::vector<Eigen::VectorXd> starts;
  for (int i = 0; i < 6; ++i) starts.push_back(Eigen::VectorXd::Constant(1, -3.0 + i));
  const auto serial = minimize_multistart(f, starts, box_of(1, -4, 4), {}, 1);
  const auto parallel = minimize_multistart(f, starts, box_of(1, -4, 4), {}, 4);
  REQUIRE(serial.size() == 6);
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].x == parallel[i].x);
    CHECK(serial[i].value == parallel[i].value);
  }
  const auto best = best_result(serial);
  for (const auto& r : serial) CHECK(serial[best].value <= r.value);
}

TEST_CASE("LVGP_THREADS caps the worker count") {
  ::setenv("LVGP_THREADS", "3", 1);
  CHECK(fit_thread_count() == 3);
  ::setenv("LVGP_THREADS", "junk", 1);
  CHECK(fit_thread_count() >= 1);
  ::unsetenv("LVGP_THREADS");
}
