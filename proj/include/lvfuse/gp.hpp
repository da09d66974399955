#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lvfuse/dataset.hpp"
#include "lvfuse/kernel.hpp"
#include "lvfuse/optimize.hpp"

namespace lvfuse {

/// Objective value returned where the correlation matrix cannot be factored.
inline constexpr double kLikelihoodPenalty = 1e10;

struct FitOptions {
  int restarts = 8;
  std::uint64_t seed = 0;
  double nugget = kDefaultNugget;
  double log10_phi_min = -4.0;
  double log10_phi_max = 4.0;
  double latent_bound = 3.0;
  QuasiNewtonOptions optimizer{};
  unsigned threads = 0;  // 0: fit_thread_count()
};

struct RestartSummary {
  double initial_objective = 0.0;
  double final_objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct FitSummary {
  std::uint64_t seed = 0;
  int restarts = 0;
  double best_objective = 0.0;
  std::size_t best_restart = 0;
  std::vector<RestartSummary> runs;
};

struct ProfileEstimates {
  double mu = 0.0;
  double sigma2 = 0.0;
};

/// Closed-form MLE of the constant mean and process variance given a
/// factored correlation matrix. Throws NumericalError when sigma2 vanishes.
ProfileEstimates profile_estimates(const Eigen::LLT<Eigen::MatrixXd>& factor,
                                   const Eigen::VectorXd& y);

/// Negative profile log-likelihood
///   n/2 ln(2 pi sigma2) + 1/2 ln|C| + n/2
/// at lengthscales 10^theta. Returns kLikelihoodPenalty instead of throwing.
double neg_log_likelihood(const Eigen::VectorXd& theta, const MixedDesign& design,
                          const Eigen::VectorXd& y, double nugget);

/// Fitted constant-mean GP on standardized data. Also the prediction core of
/// LVGPModel, whose design carries latent columns.
struct GPModel {
  std::vector<std::string> numeric_inputs;
  std::string response_column;
  Standardizer scaler;
  MixedDesign design;         // scaled training inputs
  Eigen::VectorXd response;   // standardized training responses
  Lengthscales phi;
  double nugget = kDefaultNugget;  // after any escalation
  double mu = 0.0;
  double sigma2 = 1.0;
  FitSummary fit;

  // Derived from the fields above by finalize().
  Eigen::LLT<Eigen::MatrixXd> factor;
  Eigen::VectorXd weights;  // C^-1 (y - mu 1)

  /// Factors C at (phi, nugget) and profiles mu, sigma2. A constant
  /// response skips profiling.
  void finalize();
  bool constant_response() const { return scaler.constant_response; }
};

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
  double std() const;
};

/// Fits on numeric columns only; categorical columns (including the source)
/// are ignored.
GPModel fit_gp(const MultiSourceDataset& data, const FitOptions& options = {});

/// Points in original units, one per row. Results in original units.
std::vector<Prediction> predict(const GPModel& model, const Eigen::MatrixXd& x);

/// Predictive equations on already-scaled inputs (latent columns included).
std::vector<Prediction> predict_scaled(const GPModel& model, const MixedDesign& queries);

namespace detail {

/// Uniform draws in [lo, hi] per coordinate, stream keyed by (seed, name, restart).
Eigen::VectorXd uniform_start(std::uint64_t seed, const std::string& stream, int restart,
                              const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);

unsigned resolve_threads(const FitOptions& options);

}  // namespace detail

}  // namespace lvfuse
