#pragma once

#include <vector>

#include <Eigen/Dense>

#include "lingbayes/noise.hpp"
#include "lingbayes/rng.hpp"

namespace lingbayes::detail {

constexpr double kLog2Pi = 1.83787706640934548356;

double log_inv_gamma_pdf(double x, double shape, double scale);
double log_dirichlet_pdf(const std::vector<double>& w, const std::vector<double>& alpha);
double log_normal_pdf(double x, double mean, double var);
double log_mixture_prior(const GaussianMixture& mix, const MixtureHyper& hyper);
double log_odds(double gamma);

// Gaussian proposal for one node's coefficient row, centred on the
// least-squares fit with its estimated covariance.
class CoefProposal {
 public:
  CoefProposal(const Eigen::MatrixXd& Y, int t, const std::vector<int>& parents);

  // Mean squared least-squares residual.
  double residual_variance() const { return s2_; }

  Eigen::VectorXd draw(Rng& rng) const;
  double log_density(const Eigen::VectorXd& b) const;
  Eigen::VectorXd residuals(const Eigen::MatrixXd& Y, int t, const Eigen::VectorXd& b) const;

 private:
  std::vector<int> parents_;
  double s2_ = 1.0;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd chol_;
};

// Independence proposal for one node's mixture: a deterministic EM fit to the
// residuals sets the centre of a Dirichlet / Normal / Inverse-Gamma draw, and
// the density is averaged over component relabellings so that it does not
// depend on label order.
class MixtureProposal {
 public:
  MixtureProposal(const Eigen::VectorXd& residuals, int K, const MixtureHyper& hyper);

  GaussianMixture draw(Rng& rng) const;
  double log_density(const GaussianMixture& mix) const;

 private:
  std::size_t K_;
  std::vector<double> alpha_, mean_, mean_var_, shape_, scale_;
};

// How a pair refresh treats the mixture of a node whose parents change.
enum class MixtureMove { Keep, Rescale, Refit };

}  // namespace lingbayes::detail
