#include "lvfuse/optimize.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <exception>
#include <limits>
#include <string>
#include <thread>

namespace lvfuse {

namespace {

struct Counted {
  const Objective& f;
  int count = 0;

  double operator()(const Eigen::VectorXd& x) {
    ++count;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::max();
  }
};

// Gradient with components that would push an active bound outward zeroed.
Eigen::VectorXd projected_gradient(const Eigen::VectorXd& x, const Eigen::VectorXd& g, const Box& box) {
  Eigen::VectorXd pg = g;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x(i) <= box.lower(i) && g(i) > 0) pg(i) = 0;
    if (x(i) >= box.upper(i) && g(i) < 0) pg(i) = 0;
  }
  return pg;
}

}  // namespace

Eigen::VectorXd Box::project(const Eigen::VectorXd& x) const {
  return x.cwiseMax(lower).cwiseMin(upper);
}

bool Box::contains(const Eigen::VectorXd& x) const {
  return (x.array() >= lower.array()).all() && (x.array() <= upper.array()).all();
}

Eigen::VectorXd central_gradient(const Objective& f, const Eigen::VectorXd& x, const Box& box,
                                 double step, int* evaluations) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = step * std::max(1.0, std::abs(x(i)));
    double hi = std::min(x(i) + h, box.upper(i));
    double lo = std::max(x(i) - h, box.lower(i));
    // Keep a full 2h spacing when one side is clipped.
    if (hi - lo < 2 * h) {
      if (hi >= box.upper(i)) lo = std::max(box.lower(i), hi - 2 * h);
      else hi = std::min(box.upper(i), lo + 2 * h);
    }
    probe(i) = hi;
    const double fh = f(probe);
    probe(i) = lo;
    const double fl = f(probe);
    probe(i) = x(i);
    g(i) = (fh - fl) / (hi - lo);
    if (evaluations) *evaluations += 2;
  }
  return g;
}

MinimizeResult minimize_bounded(const Objective& objective, const Eigen::VectorXd& x0,
                                const Box& box, const QuasiNewtonOptions& options) {
  Counted f{objective};
  MinimizeResult result;
  Eigen::VectorXd x = box.project(x0);
  double fx = f(x);
  result.initial_value = fx;
  auto gradient = [&](const Eigen::VectorXd& at) {
    int evals = 0;
    auto g = central_gradient(f.f, at, box, options.fd_step, &evals);
    f.count += evals;
    return g;
  };
  Eigen::VectorXd g = gradient(x);

  std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> memory;  // (s, y)
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    const Eigen::VectorXd pg = projected_gradient(x, g, box);
    if (!pg.allFinite()) break;
    if (pg.lpNorm<Eigen::Infinity>() <= options.gradient_tolerance) {
      result.converged = true;
      break;
    }
    // Free set: coordinates not held by an active bound.
    Eigen::VectorXd free_mask = Eigen::VectorXd::Ones(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (pg(i) == 0.0 && g(i) != 0.0) free_mask(i) = 0.0;

    // Two-loop recursion restricted to the free set.
    Eigen::VectorXd d = pg.cwiseProduct(free_mask);
    std::vector<double> alpha(memory.size());
    for (std::size_t k = memory.size(); k-- > 0;) {
      const auto& [s, y] = memory[k];
      const double rho = 1.0 / y.cwiseProduct(free_mask).dot(s.cwiseProduct(free_mask));
      if (!std::isfinite(rho) || rho <= 0) continue;
      alpha[k] = rho * s.cwiseProduct(free_mask).dot(d);
      d -= alpha[k] * y.cwiseProduct(free_mask);
    }
    if (!memory.empty()) {
      const auto& [s, y] = memory.back();
      const double yy = y.cwiseProduct(free_mask).squaredNorm();
      const double sy = s.cwiseProduct(free_mask).dot(y.cwiseProduct(free_mask));
      if (yy > 0 && sy > 0) d *= sy / yy;
    }
    for (std::size_t k = 0; k < memory.size(); ++k) {
      const auto& [s, y] = memory[k];
      const double rho = 1.0 / y.cwiseProduct(free_mask).dot(s.cwiseProduct(free_mask));
      if (!std::isfinite(rho) || rho <= 0) continue;
      const double beta = rho * y.cwiseProduct(free_mask).dot(d);
      d += s.cwiseProduct(free_mask) * (alpha[k] - beta);
    }
    d = -d.cwiseProduct(free_mask);
    if (!(d.dot(pg) < 0)) {
      d = -pg;
      memory.clear();
    }
    // First step (or after a reset): cap the move at unit length.
    double step = 1.0;
    if (memory.empty()) step = std::min(1.0, 1.0 / std::max(d.lpNorm<Eigen::Infinity>(), 1e-300));

    Eigen::VectorXd x_new;
    double f_new = fx;
    bool accepted = false;
    for (int tries = 0; tries < 40; ++tries) {
      x_new = box.project(x + step * d);
      const double decrease = g.dot(x_new - x);
      if ((x_new - x).lpNorm<Eigen::Infinity>() == 0.0) break;
      f_new = f(x_new);
      if (f_new <= fx + 1e-4 * std::min(decrease, 0.0) && f_new < std::numeric_limits<double>::max()) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!memory.empty()) {
        memory.clear();
        continue;
      }
      result.converged = true;
      break;
    }
    const Eigen::VectorXd g_new = gradient(x_new);
    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = g_new - g;
    if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
      memory.emplace_back(s, y);
      if (static_cast<int>(memory.size()) > options.memory) memory.pop_front();
    }
    const double change = std::abs(fx - f_new);
    x = x_new;
    fx = f_new;
    g = g_new;
    if (change <= options.relative_tolerance * std::max(1.0, std::abs(fx))) {
      result.converged = true;
      ++iter;
      break;
    }
  }
  result.x = x;
  result.value = fx;
  result.iterations = iter;
  result.evaluations = f.count;
  return result;
}

unsigned fit_thread_count() {
  if (const char* env = std::getenv("LVGP_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<MinimizeResult> minimize_multistart(const Objective& f,
                                                const std::vector<Eigen::VectorXd>& starts,
                                                const Box& box, const QuasiNewtonOptions& options,
                                                unsigned threads) {
  std::vector<MinimizeResult> results(starts.size());
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(starts.size())));
  if (threads <= 1) {
    for (std::size_t i = 0; i < starts.size(); ++i) results[i] = minimize_bounded(f, starts[i], box, options);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(starts.size());
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < starts.size();) {
        try {
          results[i] = minimize_bounded(f, starts[i], box, options);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

std::size_t best_result(const std::vector<MinimizeResult>& results) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i)
    if (results[i].value < results[best].value) best = i;
  return best;
}

}  // namespace lvfuse
