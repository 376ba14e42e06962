#include "lingbayes/noise.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "lingbayes/error.hpp"

namespace lingbayes {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

double normal_log_pdf(double x, double mean, double variance) {
  const double d = x - mean;
  return -kHalfLog2Pi - 0.5 * std::log(variance) - 0.5 * d * d / variance;
}

}  // namespace

GaussianMixture GaussianMixture::standard(int K) {
  if (K < 1) fail(ErrorCode::InvalidArgument, "mixture needs at least one component");
  GaussianMixture m;
  m.weights.assign(static_cast<std::size_t>(K), 1.0 / K);
  m.means.assign(static_cast<std::size_t>(K), 0.0);
  m.variances.assign(static_cast<std::size_t>(K), 1.0);
  return m;
}

void GaussianMixture::validate() const {
  if (weights.empty() || weights.size() != means.size() || weights.size() != variances.size()) {
    fail(ErrorCode::InvalidArgument, "mixture component arrays must be non-empty and equally sized");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (!(weights[k] >= 0.0)) fail(ErrorCode::InvalidArgument, fmt::format("negative mixture weight {}", weights[k]));
    if (!(variances[k] > 0.0)) {
      fail(ErrorCode::InvalidArgument, fmt::format("non-positive mixture variance {}", variances[k]));
    }
    if (!std::isfinite(means[k])) fail(ErrorCode::InvalidArgument, "non-finite mixture mean");
    total += weights[k];
  }
  if (std::abs(total - 1.0) > 1e-12) {
    fail(ErrorCode::InvalidArgument, fmt::format("mixture weights sum to {:.17g}", total));
  }
}

void MixtureHyper::validate() const {
  if (!(dirichlet_alpha > 0.0 && mean_prior_var > 0.0 && var_prior_shape > 0.0 && var_prior_scale > 0.0)) {
    fail(ErrorCode::InvalidArgument, "mixture hyperparameters must be strictly positive");
  }
}

double log_density(double x, const GaussianMixture& mix) {
  const std::size_t K = mix.weights.size();
  if (K == 1) return normal_log_pdf(x, mix.means[0], mix.variances[0]);
  thread_local std::vector<double> terms;
  terms.resize(K);
  for (std::size_t k = 0; k < K; ++k) terms[k] = std::log(mix.weights[k]) + normal_log_pdf(x, mix.means[k], mix.variances[k]);
  std::sort(terms.begin(), terms.end(), std::greater<>());
  const double top = terms[0];
  if (top == -std::numeric_limits<double>::infinity()) return top;
  double sum = 0.0;
  for (std::size_t k = 0; k < K; ++k) sum += std::exp(terms[k] - top);
  return top + std::log(sum);
}

std::vector<double> sample_noise(const GaussianMixture& mix, int n, Rng& rng) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "sample size must be positive");
  std::vector<double> log_w(mix.weights.size());
  for (std::size_t k = 0; k < log_w.size(); ++k) log_w[k] = std::log(mix.weights[k]);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (auto& x : out) {
    const std::size_t k = mix.size() == 1 ? 0 : rng.categorical_log(log_w);
    x = rng.normal(mix.means[k], std::sqrt(mix.variances[k]));
  }
  return out;
}

std::vector<int> gibbs_update_indicators(std::span<const double> residuals, const GaussianMixture& mix,
                                         Rng& rng) {
  const int K = mix.size();
  std::vector<int> z(residuals.size(), 0);
  if (K == 1) return z;
  std::vector<double> log_w(static_cast<std::size_t>(K));
  for (std::size_t q = 0; q < residuals.size(); ++q) {
    for (int k = 0; k < K; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      log_w[kk] = std::log(mix.weights[kk]) + normal_log_pdf(residuals[q], mix.means[kk], mix.variances[kk]);
    }
    z[q] = static_cast<int>(rng.categorical_log(log_w));
  }
  return z;
}

GaussianMixture gibbs_update_mixture(std::span<const double> residuals, std::span<const int> z,
                                     const GaussianMixture& current, const MixtureHyper& hyper, Rng& rng) {
  const int K = current.size();
  if (z.size() != residuals.size()) fail(ErrorCode::DimensionMismatch, "labels and residuals differ in length");
  std::vector<double> count(static_cast<std::size_t>(K), 0.0);
  std::vector<double> sum(static_cast<std::size_t>(K), 0.0);
  for (std::size_t q = 0; q < residuals.size(); ++q) {
    if (z[q] < 0 || z[q] >= K) fail(ErrorCode::IndexOutOfRange, fmt::format("label {} outside 0..{}", z[q], K - 1));
    count[static_cast<std::size_t>(z[q])] += 1.0;
    sum[static_cast<std::size_t>(z[q])] += residuals[q];
  }

  GaussianMixture next = current;
  if (K > 1) {
    double total = 0.0;
    for (int k = 0; k < K; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      next.weights[kk] = rng.gamma(hyper.dirichlet_alpha + count[kk]);
      total += next.weights[kk];
    }
    for (auto& w : next.weights) w /= total;
  } else {
    next.weights = {1.0};
  }

  for (int k = 0; k < K; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    const double precision = 1.0 / hyper.mean_prior_var + count[kk] / current.variances[kk];
    const double mean = (sum[kk] / current.variances[kk]) / precision;
    next.means[kk] = rng.normal(mean, std::sqrt(1.0 / precision));
  }

  std::vector<double> ss(static_cast<std::size_t>(K), 0.0);
  for (std::size_t q = 0; q < residuals.size(); ++q) {
    const double d = residuals[q] - next.means[static_cast<std::size_t>(z[q])];
    ss[static_cast<std::size_t>(z[q])] += d * d;
  }
  for (int k = 0; k < K; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    next.variances[kk] =
        rng.inv_gamma(hyper.var_prior_shape + 0.5 * count[kk], hyper.var_prior_scale + 0.5 * ss[kk]);
  }
  return next;
}

}  // namespace lingbayes
