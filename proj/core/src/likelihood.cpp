#include "lingbayes/likelihood.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "lingbayes/error.hpp"

namespace lingbayes {

namespace {

constexpr double kLog2Pi = 1.83787706640934548356;

}  // namespace

void WeightedSem::validate() const {
  const int p = graph.size();
  if (B.rows() != p || B.cols() != p) {
    fail(ErrorCode::DimensionMismatch, fmt::format("coefficient matrix is {}x{}, graph has {} nodes", B.rows(), B.cols(), p));
  }
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      if (!graph(i, j) && B(i, j) != 0.0) {
        fail(ErrorCode::InvalidArgument, fmt::format("coefficient {}>{} is nonzero without an edge", j + 1, i + 1));
      }
    }
  }
}

NodeSuffStats node_suff_stats(std::span<const double> y, const Eigen::MatrixXd& X,
                              std::span<const double> obs_variances) {
  const auto n = static_cast<Eigen::Index>(y.size());
  if (X.rows() != n || static_cast<Eigen::Index>(obs_variances.size()) != n) {
    fail(ErrorCode::DimensionMismatch, "response, design and variances differ in length");
  }
  NodeSuffStats s;
  s.n = static_cast<int>(n);
  Eigen::VectorXd w(n);
  for (Eigen::Index q = 0; q < n; ++q) {
    const double v = obs_variances[static_cast<std::size_t>(q)];
    if (!(v > 0.0)) fail(ErrorCode::InvalidArgument, fmt::format("observation variance {} is not positive", v));
    w[q] = 1.0 / v;
    s.sum_log_v += std::log(v);
  }
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
  const Eigen::VectorXd wy = w.cwiseProduct(yv);
  s.yy = yv.dot(wy);
  s.cross = X.transpose() * wy;
  s.gram = X.transpose() * w.asDiagonal() * X;
  return s;
}

namespace {

struct Posterior {
  Eigen::LLT<Eigen::MatrixXd> chol;
  Eigen::VectorXd cross;
};

Posterior conditional(const NodeSuffStats& stats, std::span<const int> parents, double gamma1) {
  const auto k = static_cast<Eigen::Index>(parents.size());
  Eigen::MatrixXd A(k, k);
  Eigen::VectorXd c(k);
  for (Eigen::Index a = 0; a < k; ++a) {
    c[a] = stats.cross[parents[static_cast<std::size_t>(a)]];
    for (Eigen::Index b = 0; b < k; ++b) {
      A(a, b) = stats.gram(parents[static_cast<std::size_t>(a)], parents[static_cast<std::size_t>(b)]);
    }
    A(a, a) += 1.0 / gamma1;
  }
  Posterior post{Eigen::LLT<Eigen::MatrixXd>(A), std::move(c)};
  if (post.chol.info() != Eigen::Success) fail(ErrorCode::SingularSystem, "coefficient posterior precision is not positive definite");
  return post;
}

}  // namespace

double collapsed_log_marginal(const NodeSuffStats& stats, std::span<const int> parents, double gamma1) {
  if (!(gamma1 > 0.0)) fail(ErrorCode::InvalidArgument, fmt::format("slab variance {} is not positive", gamma1));
  double value = -0.5 * stats.n * kLog2Pi - 0.5 * stats.sum_log_v - 0.5 * stats.yy;
  if (parents.empty()) return value;
  const auto post = conditional(stats, parents, gamma1);
  const Eigen::MatrixXd L = post.chol.matrixL();
  const double log_det_a = 2.0 * L.diagonal().array().log().sum();
  // c' A^{-1} c = |L^{-1} c|^2
  const Eigen::VectorXd half = L.triangularView<Eigen::Lower>().solve(post.cross);
  value += -0.5 * static_cast<double>(parents.size()) * std::log(gamma1) - 0.5 * log_det_a + 0.5 * half.squaredNorm();
  return value;
}

double collapsed_node_log_marginal(std::span<const double> y, const Eigen::MatrixXd& X,
                                   std::span<const double> obs_variances, double gamma1) {
  const auto stats = node_suff_stats(y, X, obs_variances);
  std::vector<int> all(static_cast<std::size_t>(X.cols()));
  for (std::size_t j = 0; j < all.size(); ++j) all[j] = static_cast<int>(j);
  return collapsed_log_marginal(stats, all, gamma1);
}

Eigen::VectorXd draw_coefficients(const NodeSuffStats& stats, std::span<const int> parents, double gamma1,
                                  Rng& rng) {
  const auto k = static_cast<Eigen::Index>(parents.size());
  if (k == 0) return Eigen::VectorXd(0);
  const auto post = conditional(stats, parents, gamma1);
  const Eigen::VectorXd mean = post.chol.solve(post.cross);
  Eigen::VectorXd xi(k);
  for (Eigen::Index a = 0; a < k; ++a) xi[a] = rng.normal();
  const Eigen::MatrixXd L = post.chol.matrixL();
  return mean + L.transpose().triangularView<Eigen::Upper>().solve(xi);
}

double log_abs_det_i_minus_b(const Eigen::MatrixXd& B) {
  const auto p = B.rows();
  const Eigen::MatrixXd W = Eigen::MatrixXd::Identity(p, p) - B;
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(W);
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < p; ++i) {
    const double u = std::abs(lu.matrixLU()(i, i));
    if (u == 0.0) fail(ErrorCode::SingularSystem, "I - B is singular");
    log_det += std::log(u);
  }
  if (log_det <= std::log(kDeterminantGuard)) {
    fail(ErrorCode::SingularSystem, fmt::format("|det(I - B)| = {:.3g} is below the 1e-10 guard", std::exp(log_det)));
  }
  return log_det;
}

double cyclic_log_likelihood(const Eigen::MatrixXd& Y, const WeightedSem& sem, const NoiseModel& noise) {
  const int p = sem.graph.size();
  if (Y.cols() != p || static_cast<int>(noise.per_node.size()) != p) {
    fail(ErrorCode::DimensionMismatch, "data, graph and noise model disagree on the node count");
  }
  const double log_det = log_abs_det_i_minus_b(sem.B);
  const Eigen::MatrixXd W = Eigen::MatrixXd::Identity(p, p) - sem.B;
  const Eigen::MatrixXd residuals = Y * W.transpose();
  double total = static_cast<double>(Y.rows()) * log_det;
  for (int i = 0; i < p; ++i) {
    const auto& mix = noise.per_node[static_cast<std::size_t>(i)];
    for (Eigen::Index q = 0; q < Y.rows(); ++q) total += log_density(residuals(q, i), mix);
  }
  return total;
}

SimulatedData simulate_sem(const WeightedSem& sem, const NoiseModel& noise, int n, std::uint64_t seed) {
  sem.validate();
  const int p = sem.graph.size();
  if (static_cast<int>(noise.per_node.size()) != p) fail(ErrorCode::DimensionMismatch, "noise model size differs from graph");
  log_abs_det_i_minus_b(sem.B);  // invertibility guard

  Rng rng(seed);
  Eigen::MatrixXd eps(n, p);
  for (int i = 0; i < p; ++i) {
    const auto& mix = noise.per_node[static_cast<std::size_t>(i)];
    mix.validate();
    const auto draws = sample_noise(mix, n, rng);
    for (int q = 0; q < n; ++q) eps(q, i) = draws[static_cast<std::size_t>(q)];
  }

  SimulatedData out;
  Eigen::MatrixXd Y(n, p);
  if (is_acyclic(sem.graph)) {
    // Topological substitution.
    std::vector<int> order;
    std::vector<int> indegree(static_cast<std::size_t>(p));
    for (int i = 0; i < p; ++i) indegree[static_cast<std::size_t>(i)] = static_cast<int>(sem.graph.parents(i).size());
    for (int i = 0; i < p; ++i) {
      if (indegree[static_cast<std::size_t>(i)] == 0) order.push_back(i);
    }
    for (std::size_t head = 0; head < order.size(); ++head) {
      const int u = order[head];
      for (int v = 0; v < p; ++v) {
        if (sem.graph(v, u) && --indegree[static_cast<std::size_t>(v)] == 0) order.push_back(v);
      }
    }
    for (int i : order) {
      Y.col(i) = eps.col(i);
      for (int j : sem.graph.parents(i)) Y.col(i) += sem.B(i, j) * Y.col(j);
    }
  } else {
    const Eigen::MatrixXd W = Eigen::MatrixXd::Identity(p, p) - sem.B;
    // Rows solve (I - B) y_q = eps_q.
    Y = W.partialPivLu().solve(eps.transpose()).transpose();
    const Eigen::VectorXcd eig = sem.B.eigenvalues();
    out.unstable = eig.cwiseAbs().maxCoeff() >= 1.0;
  }
  out.data = make_data(std::move(Y));
  return out;
}

}  // namespace lingbayes
