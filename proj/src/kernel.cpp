#include "lvfuse/kernel.hpp"

#include <cmath>
#include <sstream>

#include "lvfuse/error.hpp"

namespace lvfuse {

namespace {

double weighted_sq_distance(const double* a, const double* b, const double* phi, Eigen::Index m,
                            Eigen::Index stride_a, Eigen::Index stride_b) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double d = a[i * stride_a] - b[i * stride_b];
    s += phi[i] * (d * d);
  }
  return s;
}

double sq_distance(const double* a, const double* b, Eigen::Index k, Eigen::Index stride_a,
                   Eigen::Index stride_b) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    const double d = a[i * stride_a] - b[i * stride_b];
    s += d * d;
  }
  return s;
}

// Correlation between row i of `a` and row j of `b`.
double design_corr(const MixedDesign& a, Eigen::Index i, const MixedDesign& b, Eigen::Index j,
                   const Lengthscales& phi) {
  const double num = a.numeric.cols() == 0
                         ? 0.0
                         : weighted_sq_distance(&a.numeric(i, 0), &b.numeric(j, 0),
                                                phi.values().data(), a.numeric.cols(),
                                                a.numeric.rows(), b.numeric.rows());
  const double lat = a.latent.cols() == 0
                         ? 0.0
                         : sq_distance(&a.latent(i, 0), &b.latent(j, 0), a.latent.cols(),
                                       a.latent.rows(), b.latent.rows());
  return std::exp(-(num + lat));
}

void check_design(const MixedDesign& d, const Lengthscales& phi) {
  if (d.numeric.cols() != phi.size())
    throw DataError("dimension mismatch: " + std::to_string(d.numeric.cols()) +
                    " numeric inputs vs " + std::to_string(phi.size()) + " lengthscales");
  if (d.latent.rows() != d.numeric.rows() && d.latent.cols() != 0)
    throw DataError("latent block row count differs from numeric block");
}

}  // namespace

Lengthscales::Lengthscales(Eigen::VectorXd phi) : phi_(std::move(phi)) {
  for (Eigen::Index i = 0; i < phi_.size(); ++i)
    if (!(std::isfinite(phi_(i)) && phi_(i) > 0.0))
      throw NumericalError("lengthscale " + std::to_string(i) + " must be finite and positive");
}

Lengthscales Lengthscales::from_log10(const Eigen::VectorXd& theta) {
  Eigen::VectorXd phi(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) phi(i) = std::pow(10.0, theta(i));
  return Lengthscales(std::move(phi));
}

MixedPoint MixedDesign::point(Eigen::Index i) const {
  MixedPoint p;
  p.numeric = numeric.row(i).transpose();
  p.latent = latent.cols() ? Eigen::VectorXd(latent.row(i).transpose()) : Eigen::VectorXd();
  return p;
}

Eigen::MatrixXd embed_levels(const Eigen::MatrixXi& codes, const LatentConfig& latents) {
  if (static_cast<std::size_t>(codes.cols()) != latents.size())
    throw DataError("level code columns do not match latent tables");
  Eigen::MatrixXd out(codes.rows(), 2 * codes.cols());
  for (Eigen::Index j = 0; j < codes.cols(); ++j) {
    const auto& table = latents[static_cast<std::size_t>(j)];
    for (Eigen::Index r = 0; r < codes.rows(); ++r) {
      const int c = codes(r, j);
      if (c < 0 || c >= table.coords.rows())
        throw DataError("level code " + std::to_string(c) + " out of range for '" + table.variable + "'");
      out(r, 2 * j) = table.coords(c, 0);
      out(r, 2 * j + 1) = table.coords(c, 1);
    }
  }
  return out;
}

double gaussian_corr(const Eigen::Ref<const Eigen::VectorXd>& x,
                     const Eigen::Ref<const Eigen::VectorXd>& x2, const Lengthscales& phi) {
  if (x.size() != x2.size() || x.size() != phi.size())
    throw DataError("gaussian_corr: dimension mismatch");
  return std::exp(-weighted_sq_distance(x.data(), x2.data(), phi.values().data(), x.size(), 1, 1));
}

double mixed_corr(const MixedPoint& w, const MixedPoint& w2, const Lengthscales& phi) {
  if (w.numeric.size() != w2.numeric.size() || w.numeric.size() != phi.size() ||
      w.latent.size() != w2.latent.size())
    throw DataError("mixed_corr: dimension mismatch");
  const double num =
      weighted_sq_distance(w.numeric.data(), w2.numeric.data(), phi.values().data(), phi.size(), 1, 1);
  const double lat = w.latent.size() == 0
                         ? 0.0
                         : sq_distance(w.latent.data(), w2.latent.data(), w.latent.size(), 1, 1);
  return std::exp(-(num + lat));
}

double CorrelationSystem::log_determinant() const {
  const auto& L = factor.matrixLLT();
  double s = 0.0;
  for (Eigen::Index i = 0; i < L.rows(); ++i) s += std::log(L(i, i));
  return 2.0 * s;
}

bool try_corr_matrix(const MixedDesign& points, const Lengthscales& phi, double nugget,
                     CorrelationSystem& out) {
  check_design(points, phi);
  const Eigen::Index n = points.size();
  out.matrix.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    out.matrix(j, j) = 1.0 + nugget;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double c = design_corr(points, i, points, j, phi);
      out.matrix(i, j) = c;
      out.matrix(j, i) = c;
    }
  }
  out.nugget = nugget;
  out.factor.compute(out.matrix);
  if (out.factor.info() != Eigen::Success) return false;
  const auto& L = out.factor.matrixLLT();
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(L(i, i) > 0.0) || !std::isfinite(L(i, i))) return false;
  return true;
}

CorrelationSystem corr_matrix(const MixedDesign& points, const Lengthscales& phi, double nugget) {
  if (points.size() < 1) throw DataError("corr_matrix: no points");
  if (!(nugget >= 0.0)) throw NumericalError("nugget must be non-negative");
  CorrelationSystem sys;
  double current = nugget;
  while (true) {
    if (try_corr_matrix(points, phi, current, sys)) return sys;
    if (current >= kMaxNugget) break;
    current = current > 0.0 ? std::min(current * 10.0, kMaxNugget) : kDefaultNugget;
  }
  std::ostringstream msg;
  msg << "correlation matrix is singular at nugget " << kMaxNugget;
  int reported = 0;
  for (Eigen::Index i = 0; i < points.size() && reported < 5; ++i)
    for (Eigen::Index j = i + 1; j < points.size() && reported < 5; ++j)
      if (points.numeric.row(i) == points.numeric.row(j) &&
          (points.latent.cols() == 0 || points.latent.row(i) == points.latent.row(j))) {
        msg << (reported ? ", " : "; duplicate rows: ") << i << "=" << j;
        ++reported;
      }
  throw NumericalError(msg.str());
}

Eigen::VectorXd cross_corr(const MixedPoint& wstar, const MixedDesign& training,
                           const Lengthscales& phi) {
  if (training.size() < 1) throw DataError("cross_corr: empty training set");
  MixedDesign q;
  q.numeric = wstar.numeric.transpose();
  q.latent = wstar.latent.size() ? Eigen::MatrixXd(wstar.latent.transpose())
                                 : Eigen::MatrixXd(1, 0);
  return cross_corr(q, training, phi).row(0).transpose();
}

Eigen::MatrixXd cross_corr(const MixedDesign& queries, const MixedDesign& training,
                           const Lengthscales& phi) {
  check_design(training, phi);
  if (queries.numeric.cols() != training.numeric.cols() ||
      queries.latent.cols() != training.latent.cols())
    throw DataError("cross_corr: dimension mismatch");
  Eigen::MatrixXd out(queries.size(), training.size());
  for (Eigen::Index j = 0; j < training.size(); ++j)
    for (Eigen::Index i = 0; i < queries.size(); ++i)
      out(i, j) = design_corr(queries, i, training, j, phi);
  return out;
}

}  // namespace lvfuse
