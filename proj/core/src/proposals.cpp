#include "proposals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace lingbayes::detail {

namespace {

constexpr Eigen::Index kEmPoints = 200;

Eigen::MatrixXd columns(const Eigen::MatrixXd& Y, const std::vector<int>& idx) {
  Eigen::MatrixXd X(Y.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t a = 0; a < idx.size(); ++a) X.col(static_cast<Eigen::Index>(a)) = Y.col(idx[a]);
  return X;
}

}  // namespace

double log_inv_gamma_pdf(double x, double shape, double scale) {
  return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - scale / x;
}

double log_dirichlet_pdf(const std::vector<double>& w, const std::vector<double>& alpha) {
  if (w.size() == 1) return 0.0;
  double total = 0.0, sum_alpha = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    total += (alpha[k] - 1.0) * std::log(w[k]) - std::lgamma(alpha[k]);
    sum_alpha += alpha[k];
  }
  return total + std::lgamma(sum_alpha);
}

double log_normal_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (kLog2Pi + std::log(var) + d * d / var);
}

double log_mixture_prior(const GaussianMixture& mix, const MixtureHyper& hyper) {
  double total = log_dirichlet_pdf(mix.weights, std::vector<double>(mix.weights.size(), hyper.dirichlet_alpha));
  for (std::size_t k = 0; k < mix.weights.size(); ++k) {
    total += log_normal_pdf(mix.means[k], 0.0, hyper.mean_prior_var);
    total += log_inv_gamma_pdf(mix.variances[k], hyper.var_prior_shape, hyper.var_prior_scale);
  }
  return total;
}

double log_odds(double gamma) { return std::log(gamma) - std::log1p(-gamma); }

CoefProposal::CoefProposal(const Eigen::MatrixXd& Y, int t, const std::vector<int>& parents) : parents_(parents) {
  s2_ = std::max(Y.col(t).squaredNorm() / static_cast<double>(Y.rows()), 1e-12);
  if (parents.empty()) return;
  const Eigen::MatrixXd X = columns(Y, parents);
  const Eigen::MatrixXd gram = X.transpose() * X;
  mean_ = gram.ldlt().solve(X.transpose() * Y.col(t));
  s2_ = std::max((Y.col(t) - X * mean_).squaredNorm() / static_cast<double>(Y.rows()), 1e-12);
  const Eigen::MatrixXd cov = s2_ * gram.inverse();
  chol_ = cov.llt().matrixL();
}

Eigen::VectorXd CoefProposal::draw(Rng& rng) const {
  Eigen::VectorXd e(mean_.size());
  for (Eigen::Index k = 0; k < e.size(); ++k) e[k] = rng.normal();
  return mean_ + chol_ * e;
}

double CoefProposal::log_density(const Eigen::VectorXd& b) const {
  if (b.size() == 0) return 0.0;
  const Eigen::VectorXd u = chol_.triangularView<Eigen::Lower>().solve(b - mean_);
  return -0.5 * (static_cast<double>(b.size()) * kLog2Pi + u.squaredNorm()) - chol_.diagonal().array().log().sum();
}

Eigen::VectorXd CoefProposal::residuals(const Eigen::MatrixXd& Y, int t, const Eigen::VectorXd& b) const {
  if (b.size() == 0) return Y.col(t);
  return Y.col(t) - columns(Y, parents_) * b;
}

MixtureProposal::MixtureProposal(const Eigen::VectorXd& r, int K, const MixtureHyper& hyper)
    : K_(static_cast<std::size_t>(K)) {
  const auto full = r.size();
  const Eigen::Index stride = std::max<Eigen::Index>(1, full / kEmPoints);
  Eigen::VectorXd sub(full / stride);
  for (Eigen::Index q = 0; q < sub.size(); ++q) sub(q) = r(q * stride);
  const auto n = sub.size();
  const double scale_up = static_cast<double>(full) / static_cast<double>(n);
  const double mu = sub.mean();
  const double var = std::max((sub.array() - mu).square().sum() / static_cast<double>(n), 1e-12);
  std::vector<double> sorted(sub.data(), sub.data() + n);
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> w(K_, 1.0 / static_cast<double>(K_)), m(K_), v(K_, var), counts(K_);
  for (std::size_t k = 0; k < K_; ++k) {
    const auto at =
        static_cast<std::size_t>((static_cast<double>(k) + 0.5) / static_cast<double>(K_) * static_cast<double>(n));
    m[k] = sorted[std::min(at, sorted.size() - 1)];
  }
  std::vector<double> resp(K_);
  const int iterations = K_ == 1 ? 1 : 15;
  for (int it = 0; it < iterations; ++it) {
    std::vector<double> s0(K_, 0.0), s1(K_, 0.0), s2(K_, 0.0);
    for (Eigen::Index q = 0; q < n; ++q) {
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < K_; ++k) {
        resp[k] = std::log(w[k]) + log_normal_pdf(sub(q), m[k], v[k]);
        top = std::max(top, resp[k]);
      }
      double total = 0.0;
      for (auto& x : resp) total += (x = std::exp(x - top));
      for (std::size_t k = 0; k < K_; ++k) {
        const double g = resp[k] / total;
        s0[k] += g;
        s1[k] += g * sub(q);
        s2[k] += g * sub(q) * sub(q);
      }
    }
    for (std::size_t k = 0; k < K_; ++k) {
      counts[k] = s0[k] * scale_up;
      w[k] = (s0[k] + 1e-3) / (static_cast<double>(n) + 1e-3 * static_cast<double>(K_));
      if (s0[k] > 1e-8) {
        m[k] = s1[k] / s0[k];
        v[k] = std::max(s2[k] / s0[k] - m[k] * m[k], 1e-6 * var);
      } else {
        v[k] = var;
      }
    }
  }
  for (std::size_t k = 0; k < K_; ++k) {
    alpha_.push_back(hyper.dirichlet_alpha + counts[k]);
    mean_.push_back(m[k]);
    mean_var_.push_back(v[k] / (counts[k] + 1.0));
    shape_.push_back(hyper.var_prior_shape + 0.5 * counts[k]);
    scale_.push_back(v[k] * (shape_.back() - 1.0));
  }
}

GaussianMixture MixtureProposal::draw(Rng& rng) const {
  GaussianMixture mix;
  double total = 0.0;
  for (std::size_t k = 0; k < K_; ++k) {
    mix.weights.push_back(K_ > 1 ? rng.gamma(alpha_[k]) : 1.0);
    total += mix.weights.back();
    mix.means.push_back(rng.normal(mean_[k], std::sqrt(mean_var_[k])));
    mix.variances.push_back(rng.inv_gamma(shape_[k], scale_[k]));
  }
  for (auto& w : mix.weights) w /= total;
  if (K_ == 1) return mix;
  std::vector<std::size_t> order(K_);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng.engine());
  GaussianMixture permuted = mix;
  for (std::size_t k = 0; k < K_; ++k) {
    permuted.weights[k] = mix.weights[order[k]];
    permuted.means[k] = mix.means[order[k]];
    permuted.variances[k] = mix.variances[order[k]];
  }
  return permuted;
}

double MixtureProposal::log_density(const GaussianMixture& mix) const {
  std::vector<std::size_t> perm(K_);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::vector<double> terms;
  std::vector<double> alpha(K_);
  do {
    double lp = 0.0;
    for (std::size_t k = 0; k < K_; ++k) {
      const auto c = perm[k];
      alpha[k] = alpha_[c];
      lp += log_normal_pdf(mix.means[k], mean_[c], mean_var_[c]) + log_inv_gamma_pdf(mix.variances[k], shape_[c], scale_[c]);
    }
    terms.push_back(lp + log_dirichlet_pdf(mix.weights, alpha));
  } while (std::next_permutation(perm.begin(), perm.end()));
  const double top = *std::max_element(terms.begin(), terms.end());
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - top);
  return top + std::log(sum / static_cast<double>(terms.size()));
}

}  // namespace lingbayes::detail
