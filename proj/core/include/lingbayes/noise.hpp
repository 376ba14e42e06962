#pragma once

#include <span>
#include <vector>

#include "lingbayes/rng.hpp"

namespace lingbayes {

// Finite Gaussian mixture: sum_k weights[k] * N(means[k], variances[k]).
struct GaussianMixture {
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> variances;

  int size() const noexcept { return static_cast<int>(weights.size()); }

  static GaussianMixture standard(int K = 1);
  // Throws InvalidArgument unless weights form a simplex (within 1e-12) and
  // every variance is positive.
  void validate() const;

  friend bool operator==(const GaussianMixture&, const GaussianMixture&) = default;
};

// Independent per-node noise distributions.
struct NoiseModel {
  std::vector<GaussianMixture> per_node;

  friend bool operator==(const NoiseModel&, const NoiseModel&) = default;
};

// Conjugate prior for each node's mixture: symmetric Dirichlet on weights,
// N(0, mean_prior_var) on component means and Inverse-Gamma on variances.
struct MixtureHyper {
  double dirichlet_alpha = 1.0;
  double mean_prior_var = 10.0;
  double var_prior_shape = 2.0;
  double var_prior_scale = 1.0;

  void validate() const;
  friend bool operator==(const MixtureHyper&, const MixtureHyper&) = default;
};

double log_density(double x, const GaussianMixture& mix);

std::vector<double> sample_noise(const GaussianMixture& mix, int n, Rng& rng);

// Component labels (0-based) drawn from their exact full conditionals given
// the residuals.
std::vector<int> gibbs_update_indicators(std::span<const double> residuals, const GaussianMixture& mix,
                                         Rng& rng);

// One Gibbs pass over the mixture parameters given residuals and labels:
// weights | z ~ Dirichlet, then each mean | variance, then each variance |
// mean. `current` supplies the variances conditioned on by the mean update.
GaussianMixture gibbs_update_mixture(std::span<const double> residuals, std::span<const int> z,
                                     const GaussianMixture& current, const MixtureHyper& hyper, Rng& rng);

}  // namespace lingbayes
