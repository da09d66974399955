#pragma once

#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

namespace lvfuse {

/// Positive per-dimension scales of the Gaussian correlation.
class Lengthscales {
 public:
  Lengthscales() = default;
  explicit Lengthscales(Eigen::VectorXd phi);

  /// phi_i = 10^theta_i
  static Lengthscales from_log10(const Eigen::VectorXd& theta);

  const Eigen::VectorXd& values() const { return phi_; }
  Eigen::Index size() const { return phi_.size(); }
  double operator[](Eigen::Index i) const { return phi_(i); }

 private:
  Eigen::VectorXd phi_;
};

/// Latent coordinates of one categorical variable, one row per level.
struct LatentTable {
  std::string variable;
  std::vector<std::string> levels;
  Eigen::MatrixX2d coords;
};

/// One latent table per categorical variable (categorical inputs, then source).
using LatentConfig = std::vector<LatentTable>;

/// A model-space input: scaled numerics followed by the substituted latent
/// pairs of every categorical variable.
struct MixedPoint {
  Eigen::VectorXd numeric;
  Eigen::VectorXd latent;
};

/// Row-wise collection of mixed points.
struct MixedDesign {
  Eigen::MatrixXd numeric;  // n x m
  Eigen::MatrixXd latent;   // n x 2q'

  Eigen::Index size() const { return numeric.rows(); }
  MixedPoint point(Eigen::Index i) const;
};

/// Substitutes latent pairs for level codes (n x q' codes -> n x 2q').
Eigen::MatrixXd embed_levels(const Eigen::MatrixXi& codes, const LatentConfig& latents);

double gaussian_corr(const Eigen::Ref<const Eigen::VectorXd>& x,
                     const Eigen::Ref<const Eigen::VectorXd>& x2, const Lengthscales& phi);

/// exp(-sum phi_i dx_i^2 - sum_j |z_j - z'_j|^2); the latent term has unit weight.
double mixed_corr(const MixedPoint& w, const MixedPoint& w2, const Lengthscales& phi);

struct CorrelationSystem {
  Eigen::MatrixXd matrix;
  Eigen::LLT<Eigen::MatrixXd> factor;
  double nugget = 0.0;  // value actually used after escalation

  double log_determinant() const;
};

inline constexpr double kDefaultNugget = 1e-6;
inline constexpr double kMaxNugget = 1e-2;

/// Correlation matrix with `nugget` on the diagonal. On Cholesky failure the
/// nugget grows x10 up to kMaxNugget; past that, NumericalError naming any
/// duplicate rows.
CorrelationSystem corr_matrix(const MixedDesign& points, const Lengthscales& phi, double nugget);

/// Same, but a single attempt at `nugget`. Returns false on Cholesky failure.
bool try_corr_matrix(const MixedDesign& points, const Lengthscales& phi, double nugget,
                     CorrelationSystem& out);

Eigen::VectorXd cross_corr(const MixedPoint& wstar, const MixedDesign& training,
                           const Lengthscales& phi);

/// n_star x n matrix of cross correlations.
Eigen::MatrixXd cross_corr(const MixedDesign& queries, const MixedDesign& training,
                           const Lengthscales& phi);

}  // namespace lvfuse
