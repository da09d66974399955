#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lvfuse/dataset.hpp"
#include "lvfuse/gp.hpp"
#include "lvfuse/kernel.hpp"

namespace lvfuse {

/// Half-width of the latent box; also fixes the dissimilarity normaliser.
inline constexpr double kLatentBound = 3.0;

/// Mixed-variable GP: every categorical variable (the source included) is
/// embedded in a learned 2-D latent plane.
struct LVGPModel {
  VariableSchema schema;
  LatentConfig latents;             // one table per schema.categorical(j)
  Eigen::MatrixXi training_levels;  // n x q', codes of the training rows
  GPModel core;                     // design.latent = embed_levels(training_levels, latents)
};

/// A query in original units with one level name per categorical variable,
/// in schema.categorical_variables() order.
struct MixedInput {
  Eigen::VectorXd numeric;
  std::vector<std::string> levels;
};

/// Maps the optimiser's vector [theta (m) | free latent coordinates] to
/// latent tables. Per variable with L levels: level 1 is pinned at (0, 0),
/// level 2 at (z1 >= 0, 0), levels 3..L are free, giving 2L - 3 parameters
/// (none when L = 1).
class LatentParameterization {
 public:
  LatentParameterization(std::vector<CategoricalVariable> variables, std::size_t numeric_dims,
                         double bound = kLatentBound);

  std::size_t numeric_dims() const { return numeric_dims_; }
  std::size_t latent_size() const { return latent_size_; }
  std::size_t size() const { return numeric_dims_ + latent_size_; }

  LatentConfig unpack(const Eigen::VectorXd& params) const;
  /// Latent box for the free coordinates appended to [theta_lo, theta_hi].
  Box box(double theta_lo, double theta_hi) const;
  /// Random start: theta uniform in its bounds, latents uniform in [-1, 1].
  Eigen::VectorXd initial(std::uint64_t seed, int restart, double theta_lo, double theta_hi) const;

 private:
  std::vector<CategoricalVariable> variables_;
  std::size_t numeric_dims_;
  std::size_t latent_size_ = 0;
  double bound_;
};

/// Negative profile log-likelihood as a function of the joint parameter
/// vector. `scaled` must be standardized data.
double lvgp_neg_log_likelihood(const Eigen::VectorXd& params, const LatentParameterization& layout,
                               const MultiSourceDataset& scaled, double nugget);

/// Joint MLE over log10 lengthscales and anchored latent coordinates.
LVGPModel fit_lvgp(const MultiSourceDataset& data, const FitOptions& options = {});

std::vector<Prediction> predict_lvgp(const LVGPModel& model, const std::vector<MixedInput>& points);
/// Rows of `data`, matching levels by name against the model's registry.
std::vector<Prediction> predict_lvgp(const LVGPModel& model, const MultiSourceDataset& data);

struct LatentMap {
  std::string variable;
  std::vector<std::string> levels;
  Eigen::MatrixX2d coords;
  std::optional<std::string> reference;
  std::vector<double> dissimilarity;  // aligned with levels; empty without reference
};

/// Fitted coordinates of one variable. With a reference, every level is
/// translated so the reference sits at the origin and D is filled in.
LatentMap latent_map(const LVGPModel& model, std::string_view variable,
                     std::optional<std::string> reference = std::nullopt);

/// Translates to a new reference and recomputes D. Distances are unchanged.
LatentMap recenter(LatentMap map, const std::string& reference);

/// D(z) = |z - z_ref| / (3 sqrt 2). Not clamped: after recentering on a
/// level away from the box centre, values above 1 are possible.
std::vector<std::pair<std::string, double>> dissimilarity(const LatentMap& map);

/// Keeps rows whose source has D <= threshold; the reference always stays.
/// Unused source levels are dropped from the registry.
MultiSourceDataset filter_sources(const MultiSourceDataset& data, const LatentMap& map,
                                  double threshold);

/// Relabels one source's rows, at random, half to "<source>_1" and half to
/// "<source>_2". "<source>_1" takes the original level's registry slot;
/// "<source>_2" is appended.
MultiSourceDataset split_source(const MultiSourceDataset& data, std::string_view source,
                                std::uint64_t seed);

}  // namespace lvfuse
