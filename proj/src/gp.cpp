#include "lvfuse/gp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lvfuse/error.hpp"
#include "lvfuse/random.hpp"

namespace lvfuse {

ProfileEstimates profile_estimates(const Eigen::LLT<Eigen::MatrixXd>& factor,
                                   const Eigen::VectorXd& y) {
  const Eigen::Index n = y.size();
  if (n < 2) throw NumericalError("profile estimates need at least 2 observations");
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  const Eigen::VectorXd cinv_one = factor.solve(ones);
  const Eigen::VectorXd cinv_y = factor.solve(y);
  ProfileEstimates out;
  out.mu = ones.dot(cinv_y) / ones.dot(cinv_one);
  const Eigen::VectorXd r = y - out.mu * ones;
  // r' C^-1 r as |L^-1 r|^2
  const Eigen::VectorXd half = factor.matrixL().solve(r);
  out.sigma2 = half.squaredNorm() / static_cast<double>(n);
  const double scale = std::max(y.squaredNorm() / static_cast<double>(n), 1e-300);
  if (!(out.sigma2 > 1e-14 * scale) || !std::isfinite(out.sigma2))
    throw NumericalError("process variance estimate is degenerate (sigma2 = " +
                         std::to_string(out.sigma2) + ")");
  return out;
}

double neg_log_likelihood(const Eigen::VectorXd& theta, const MixedDesign& design,
                          const Eigen::VectorXd& y, double nugget) {
  try {
    const auto sys = corr_matrix(design, Lengthscales::from_log10(theta), nugget);
    const auto est = profile_estimates(sys.factor, y);
    const double n = static_cast<double>(y.size());
    const double value = 0.5 * n * std::log(2.0 * std::numbers::pi * est.sigma2) +
                         0.5 * sys.log_determinant() + 0.5 * n;
    return std::isfinite(value) ? value : kLikelihoodPenalty;
  } catch (const Error&) {
    return kLikelihoodPenalty;
  }
}

void GPModel::finalize() {
  auto sys = corr_matrix(design, phi, nugget);
  nugget = sys.nugget;
  factor = std::move(sys.factor);
  if (constant_response()) {
    mu = 0.0;
    sigma2 = 1.0;
  } else {
    const auto est = profile_estimates(factor, response);
    mu = est.mu;
    sigma2 = est.sigma2;
  }
  weights = factor.solve((response.array() - mu).matrix());
}

double Prediction::std() const { return std::sqrt(std::max(variance, 0.0)); }

std::vector<Prediction> predict_scaled(const GPModel& model, const MixedDesign& queries) {
  const Eigen::MatrixXd c = cross_corr(queries, model.design, model.phi);
  const Eigen::VectorXd mean = (c * model.weights).array() + model.mu;
  const Eigen::MatrixXd half = model.factor.matrixL().solve(c.transpose());
  std::vector<Prediction> out(static_cast<std::size_t>(queries.size()));
  for (Eigen::Index i = 0; i < queries.size(); ++i) {
    const double reduction = half.col(i).squaredNorm();
    const double var = std::max(0.0, model.sigma2 * (1.0 - reduction));
    auto& p = out[static_cast<std::size_t>(i)];
    p.mean = model.scaler.unscale_response(mean(i));
    p.variance = model.scaler.unscale_variance(var);
  }
  return out;
}

std::vector<Prediction> predict(const GPModel& model, const Eigen::MatrixXd& x) {
  if (model.design.latent.cols() != 0)
    throw DataError("model has categorical inputs; use predict_lvgp");
  if (x.cols() != model.design.numeric.cols())
    throw DataError("predict: expected " + std::to_string(model.design.numeric.cols()) +
                    " numeric inputs, got " + std::to_string(x.cols()));
  MixedDesign q;
  q.numeric = model.scaler.scale_inputs(x);
  q.latent.resize(x.rows(), 0);
  return predict_scaled(model, q);
}

namespace detail {

Eigen::VectorXd uniform_start(std::uint64_t seed, const std::string& stream, int restart,
                              const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  CounterRng rng(seed, stream + "/restart" + std::to_string(restart));
  Eigen::VectorXd x(lo.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.uniform(lo(i), hi(i));
  return x;
}

unsigned resolve_threads(const FitOptions& options) {
  return options.threads ? options.threads : fit_thread_count();
}

}  // namespace detail

GPModel fit_gp(const MultiSourceDataset& data, const FitOptions& options) {
  if (data.size() < 2) throw DataError("fit_gp needs at least 2 rows");
  if (data.numeric.cols() < 1) throw DataError("fit_gp needs at least one numeric input");
  if (options.restarts < 1) throw DataError("restarts must be >= 1");
  auto [scaled, scaler] = standardize(data);

  GPModel model;
  model.numeric_inputs = data.schema.numeric_inputs;
  model.response_column = data.schema.response_column;
  model.scaler = scaler;
  model.design.numeric = scaled.numeric;
  model.design.latent.resize(scaled.numeric.rows(), 0);
  model.response = scaled.response;
  model.nugget = options.nugget;
  model.fit.seed = options.seed;
  model.fit.restarts = options.restarts;

  const Eigen::Index m = data.numeric.cols();
  if (scaler.constant_response) {
    model.phi = Lengthscales(Eigen::VectorXd::Ones(m));
    model.finalize();
    return model;
  }

  Box box{Eigen::VectorXd::Constant(m, options.log10_phi_min),
          Eigen::VectorXd::Constant(m, options.log10_phi_max)};
  const MixedDesign& design = model.design;
  const Eigen::VectorXd& y = model.response;
  const double nugget = options.nugget;
  Objective objective = [&](const Eigen::VectorXd& theta) {
    return neg_log_likelihood(theta, design, y, nugget);
  };
  std::vector<Eigen::VectorXd> starts;
  for (int r = 0; r < options.restarts; ++r)
    starts.push_back(detail::uniform_start(options.seed, "gp/theta", r, box.lower, box.upper));
  const auto runs =
      minimize_multistart(objective, starts, box, options.optimizer, detail::resolve_threads(options));
  const std::size_t best = best_result(runs);
  if (!(runs[best].value < kLikelihoodPenalty))
    throw NumericalError("GP is unfittable: every restart failed to factor the correlation matrix");

  for (const auto& r : runs)
    model.fit.runs.push_back({r.initial_value, r.value, r.iterations, r.converged});
  model.fit.best_restart = best;
  model.fit.best_objective = runs[best].value;
  model.phi = Lengthscales::from_log10(runs[best].x);
  model.finalize();
  return model;
}

}  // namespace lvfuse
