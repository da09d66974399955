#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace lvfuse {

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Eigen::Index size() const { return lower.size(); }
  Eigen::VectorXd project(const Eigen::VectorXd& x) const;
  bool contains(const Eigen::VectorXd& x) const;
};

struct QuasiNewtonOptions {
  int max_iterations = 1000;  // restarts on the latent valleys need 300-550
  double relative_tolerance = 1e-8;  // on the objective change per iteration
  double gradient_tolerance = 1e-8;  // on the projected gradient, inf-norm
  // Wider than sqrt(eps): likelihoods carry ~1e-10 roundoff from the
  // Cholesky of an ill-conditioned C, which a 1e-6 step amplifies to ~1e-4.
  double fd_step = 1e-5;
  int memory = 10;
};

struct MinimizeResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double initial_value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

/// Central-difference gradient. Near a bound the stencil is shifted to stay
/// inside the box and the quotient uses the actual spacing.
Eigen::VectorXd central_gradient(const Objective& f, const Eigen::VectorXd& x, const Box& box,
                                 double step, int* evaluations = nullptr);

/// Projected limited-memory BFGS with numerical gradients. Variables resting
/// on a bound with the gradient pointing outward are frozen for the step;
/// steps follow the projected path with Armijo backtracking.
MinimizeResult minimize_bounded(const Objective& f, const Eigen::VectorXd& x0, const Box& box,
                                const QuasiNewtonOptions& options = {});

/// Number of worker threads for independent restarts: LVGP_THREADS when set
/// to a positive integer, otherwise the hardware concurrency.
unsigned fit_thread_count();

/// Runs minimize_bounded from every start, in parallel across at most
/// `threads` workers. Results keep the order of `starts`.
std::vector<MinimizeResult> minimize_multistart(const Objective& f,
                                                const std::vector<Eigen::VectorXd>& starts,
                                                const Box& box, const QuasiNewtonOptions& options,
                                                unsigned threads);

/// Index of the lowest final value; ties go to the earliest start.
std::size_t best_result(const std::vector<MinimizeResult>& results);

}  // namespace lvfuse
