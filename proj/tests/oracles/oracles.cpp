#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint32_t encode(const Adj& a) {
  const int p = static_cast<int>(a.size());
  std::uint32_t m = 0;
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      if (a[i][j]) m |= 1u << (i * p + j);
  return m;
}

bool is_parent(const Adj& a, int child, int parent) { return a[child][parent] != 0; }

void simple_paths(const Adj& a, int at, int goal, std::vector<int>& path, std::vector<char>& on_path,
                  std::vector<std::vector<int>>& out) {
  if (at == goal) {
    out.push_back(path);
    return;
  }
  const int p = static_cast<int>(a.size());
  for (int next = 0; next < p; ++next) {
    if (on_path[next] || !(a[at][next] || a[next][at])) continue;
    on_path[next] = 1;
    path.push_back(next);
    simple_paths(a, next, goal, path, on_path, out);
    path.pop_back();
    on_path[next] = 0;
  }
}

bool adjustment_valid(const Adj& truth, int i, int j, const std::vector<int>& z) {
  const int p = static_cast<int>(truth.size());
  std::vector<char> in_z(p, 0);
  for (int v : z) in_z[v] = 1;

  std::vector<std::vector<int>> paths;
  std::vector<int> path{i};
  std::vector<char> on_path(p, 0);
  on_path[i] = 1;
  simple_paths(truth, i, j, path, on_path, paths);

  for (const auto& pth : paths) {
    bool causal = true;
    for (std::size_t t = 0; t + 1 < pth.size(); ++t) {
      if (!is_parent(truth, pth[t + 1], pth[t])) causal = false;
    }
    if (causal) {
      for (std::size_t t = 1; t < pth.size(); ++t) {
        for (int v = 0; v < p; ++v) {
          if (in_z[v] && has_directed_path(truth, pth[t], v)) return false;
        }
      }
      continue;
    }
    bool blocked = false;
    for (std::size_t t = 1; t + 1 < pth.size() && !blocked; ++t) {
      const int prev = pth[t - 1], mid = pth[t], next = pth[t + 1];
      const bool collider = is_parent(truth, mid, prev) && is_parent(truth, mid, next);
      if (collider) {
        bool opened = false;
        for (int v = 0; v < p; ++v) {
          if (in_z[v] && has_directed_path(truth, mid, v)) opened = true;
        }
        blocked = !opened;
      } else {
        blocked = in_z[mid] != 0;
      }
    }
    if (!blocked) return false;
  }
  return true;
}

double log_sum_exp(const std::vector<double>& xs) {
  const double m = *std::max_element(xs.begin(), xs.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

// log ∫ exp(f(t)) dt: locate the mode on a coarse grid, widen until the
// integrand has fallen by e^-50, then apply the trapezoid rule on a fine grid.
double log_integrate(const std::function<double(double)>& f, double lo, double hi, double coarse, double fine) {
  const int n_coarse = static_cast<int>(std::ceil((hi - lo) / coarse));
  std::vector<double> vals(n_coarse + 1);
  int best = 0;
  for (int s = 0; s <= n_coarse; ++s) {
    vals[s] = f(lo + s * coarse);
    if (vals[s] > vals[best]) best = s;
  }
  int left = best, right = best;
  while (left > 0 && vals[left] > vals[best] - 50.0) --left;
  while (right < n_coarse && vals[right] > vals[best] - 50.0) ++right;
  const double a = lo + left * coarse, b = lo + right * coarse;
  const int n_fine = std::max(2, static_cast<int>(std::ceil((b - a) / fine)));
  const double h = (b - a) / n_fine;
  std::vector<double> terms(n_fine + 1);
  for (int s = 0; s <= n_fine; ++s) {
    terms[s] = f(a + s * h) + std::log(h) - ((s == 0 || s == n_fine) ? std::log(2.0) : 0.0);
  }
  return log_sum_exp(terms);
}

double log_inv_gamma(double x, double shape, double scale) {
  return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - scale / x;
}

double log_beta_fn(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

}  // namespace

Adj empty_adj(int p) { return Adj(p, std::vector<int>(p, 0)); }

bool has_directed_path(const Adj& a, int from, int to) {
  const int p = static_cast<int>(a.size());
  std::vector<char> seen(p, 0);
  std::vector<int> stack{from};
  seen[from] = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    if (u == to) return true;
    for (int w = 0; w < p; ++w) {
      if (a[w][u] && !seen[w]) {
        seen[w] = 1;
        stack.push_back(w);
      }
    }
  }
  return false;
}

bool acyclic(const Adj& a) {
  const int p = static_cast<int>(a.size());
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      if (a[i][j] && (i == j || has_directed_path(a, i, j))) return false;
  return true;
}

std::string key(const Adj& a) {
  const int p = static_cast<int>(a.size());
  std::ostringstream out;
  bool first = true;
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      if (!a[i][j]) continue;
      if (!first) out << ';';
      out << i + 1 << '<' << j + 1;
      first = false;
    }
  }
  return out.str();
}

int shd_search(const Adj& from, const Adj& to) {
  const int p = static_cast<int>(from.size());
  const std::uint32_t start = encode(from), goal = encode(to);
  std::unordered_map<std::uint32_t, int> dist{{start, 0}};
  std::deque<std::uint32_t> queue{start};
  while (!queue.empty()) {
    const std::uint32_t m = queue.front();
    queue.pop_front();
    if (m == goal) return dist[m];
    const int d = dist[m];
    auto visit = [&](std::uint32_t next) {
      if (dist.emplace(next, d + 1).second) queue.push_back(next);
    };
    for (int i = 0; i < p; ++i) {
      for (int j = 0; j < p; ++j) {
        if (i == j) continue;
        const std::uint32_t bit = 1u << (i * p + j), back = 1u << (j * p + i);
        visit(m ^ bit);
        if ((m & bit) && !(m & back)) visit((m & ~bit) | back);
      }
    }
  }
  return -1;
}

int hamming(const Adj& a, const Adj& b) {
  int count = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) count += a[i][j] != b[i][j];
  return count;
}

int sid_paths(const Adj& truth, const Adj& est) {
  const int p = static_cast<int>(truth.size());
  int count = 0;
  for (int i = 0; i < p; ++i) {
    std::vector<int> z;
    for (int k = 0; k < p; ++k)
      if (est[i][k]) z.push_back(k);
    for (int j = 0; j < p; ++j) {
      if (j == i) continue;
      const bool j_in_z = std::find(z.begin(), z.end(), j) != z.end();
      const bool wrong = j_in_z ? has_directed_path(truth, i, j) : !adjustment_valid(truth, i, j, z);
      count += wrong;
    }
  }
  return count;
}

std::vector<Adj> all_dags(int p) {
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      if (i != j) pairs.emplace_back(i, j);
  std::vector<Adj> out;
  for (std::uint32_t m = 0; m < (1u << pairs.size()); ++m) {
    Adj a = empty_adj(p);
    for (std::size_t b = 0; b < pairs.size(); ++b)
      if ((m >> b) & 1u) a[pairs[b].first][pairs[b].second] = 1;
    if (acyclic(a)) out.push_back(a);
  }
  return out;
}

std::size_t medoid_argmin(const std::vector<Adj>& graphs, const std::vector<double>& weights,
                          const std::function<double(const Adj&, const Adj&)>& d) {
  std::size_t best = 0;
  double best_loss = kInf;
  for (std::size_t l = 0; l < graphs.size(); ++l) {
    double loss = 0.0;
    for (std::size_t u = 0; u < graphs.size(); ++u) loss += weights[u] * d(graphs[l], graphs[u]);
    if (loss < best_loss || (loss == best_loss && key(graphs[l]) < key(graphs[best]))) {
      best = l;
      best_loss = loss;
    }
  }
  return best;
}

double collapsed_quadrature(const std::vector<double>& y, const std::vector<std::vector<double>>& x_columns,
                            const std::vector<double>& v, double gamma1) {
  const std::size_t n = y.size(), k = x_columns.size();
  auto log_integrand = [&](const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t q = 0; q < n; ++q) {
      double mean = 0.0;
      for (std::size_t c = 0; c < k; ++c) mean += x_columns[c][q] * b[c];
      const double r = y[q] - mean;
      s += -0.5 * std::log(2.0 * std::numbers::pi * v[q]) - 0.5 * r * r / v[q];
    }
    for (double bj : b) s += -0.5 * std::log(2.0 * std::numbers::pi * gamma1) - 0.5 * bj * bj / gamma1;
    return s;
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  constexpr unsigned depth = 15;
  constexpr double tol = 1e-10;
  if (k == 0) return log_integrand({});
  // Shift by the integrand at the origin so the quadrature works with O(1)
  // magnitudes.
  const double shift = log_integrand(std::vector<double>(k, 0.0));
  if (k == 1) {
    const double val = GK::integrate([&](double b) { return std::exp(log_integrand({b}) - shift); }, -kInf, kInf,
                                     depth, tol);
    return shift + std::log(val);
  }
  auto inner = [&](double b1) {
    return GK::integrate([&](double b2) { return std::exp(log_integrand({b1, b2}) - shift); }, -kInf, kInf,
                         depth, tol);
  };
  return shift + std::log(GK::integrate(inner, -kInf, kInf, depth, tol));
}

double sem_mvn_log_density(const Eigen::VectorXd& y, const Eigen::MatrixXd& B, const Eigen::VectorXd& means,
                           const Eigen::VectorXd& variances) {
  const auto p = y.size();
  const Eigen::MatrixXd A = (Eigen::MatrixXd::Identity(p, p) - B).inverse();
  const Eigen::VectorXd mu = A * means;
  const Eigen::MatrixXd sigma = A * variances.asDiagonal() * A.transpose();
  const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  const Eigen::VectorXd r = y - mu;
  const Eigen::VectorXd w = llt.matrixL().solve(r);
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < p; ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i));
  return -0.5 * (static_cast<double>(p) * std::log(2.0 * std::numbers::pi) + log_det + w.squaredNorm());
}

DagPosterior exact_dag_posterior(const Eigen::MatrixXd& Y, const DagPosteriorPrior& prior) {
  const int n = static_cast<int>(Y.rows()), p = static_cast<int>(Y.cols());

  // Outer grid over u = log gamma1, shared by all graphs.
  const double u_lo = -25.0, u_hi = 10.0, u_step = 0.02;
  const int n_u = static_cast<int>(std::round((u_hi - u_lo) / u_step));

  // node_terms[(i, parent mask)][s] = log ∫ p(y_i | parents, sigma2, gamma1 = e^{u_s}) p(sigma2) dsigma2
  std::map<std::pair<int, std::uint32_t>, std::vector<double>> node_terms;
  auto node_term = [&](int i, std::uint32_t mask) -> const std::vector<double>& {
    auto it = node_terms.find({i, mask});
    if (it != node_terms.end()) return it->second;
    std::vector<int> parents;
    for (int j = 0; j < p; ++j)
      if ((mask >> j) & 1u) parents.push_back(j);
    const int k = static_cast<int>(parents.size());
    Eigen::MatrixXd Z(n, k + 1);
    Z.col(0).setOnes();
    for (int c = 0; c < k; ++c) Z.col(c + 1) = Y.col(parents[c]);
    const Eigen::VectorXd y = Y.col(i);
    const Eigen::MatrixXd G = Z.transpose() * Z;
    const Eigen::VectorXd c = Z.transpose() * y;
    const double yy = y.squaredNorm();

    auto log_marginal = [&](double sigma2, double gamma1) {
      Eigen::VectorXd prior_prec(k + 1);
      prior_prec(0) = 1.0 / prior.mean_prior_var;
      for (int a = 1; a <= k; ++a) prior_prec(a) = 1.0 / gamma1;
      Eigen::MatrixXd A = G / sigma2;
      A.diagonal() += prior_prec;
      const Eigen::LLT<Eigen::MatrixXd> llt(A);
      const Eigen::VectorXd b = c / sigma2;
      double log_det_a = 0.0;
      for (int a = 0; a <= k; ++a) log_det_a += 2.0 * std::log(llt.matrixL()(a, a));
      const double quad = yy / sigma2 - b.dot(llt.solve(b));
      return -0.5 * n * std::log(2.0 * std::numbers::pi * sigma2) + 0.5 * prior_prec.array().log().sum() -
             0.5 * log_det_a - 0.5 * quad;
    };
    auto integrate_sigma = [&](double gamma1) {
      return log_integrate(
          [&](double t) {
            const double s2 = std::exp(t);
            return log_marginal(s2, gamma1) + log_inv_gamma(s2, prior.var_prior_shape, prior.var_prior_scale) + t;
          },
          -14.0, 8.0, 0.1, 0.004);
    };
    std::vector<double> terms(n_u + 1);
    if (k == 0) {
      std::fill(terms.begin(), terms.end(), integrate_sigma(1.0));
    } else {
      for (int s = 0; s <= n_u; ++s) terms[s] = integrate_sigma(std::exp(u_lo + s * u_step));
    }
    return node_terms.emplace(std::pair{i, mask}, std::move(terms)).first->second;
  };

  DagPosterior out;
  out.graphs = all_dags(p);
  const double pairs = static_cast<double>(p) * (p - 1);
  std::vector<double> log_post;
  for (const auto& g : out.graphs) {
    int edges = 0;
    std::vector<std::uint32_t> masks(p, 0);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j)
        if (g[i][j]) {
          masks[i] |= 1u << j;
          ++edges;
        }
    std::vector<double> outer(n_u + 1);
    for (int s = 0; s <= n_u; ++s) {
      const double u = u_lo + s * u_step;
      double v = log_inv_gamma(std::exp(u), prior.a_gamma1, prior.b_gamma1) + u + std::log(u_step);
      if (s == 0 || s == n_u) v -= std::log(2.0);
      for (int i = 0; i < p; ++i) v += node_term(i, masks[i])[s];
      outer[s] = v;
    }
    const double log_prior =
        log_beta_fn(prior.a_gamma + edges, prior.b_gamma + pairs - edges) - log_beta_fn(prior.a_gamma, prior.b_gamma);
    log_post.push_back(log_prior + log_sum_exp(outer));
  }
  const double norm = log_sum_exp(log_post);
  for (double lp : log_post) out.probs.push_back(std::exp(lp - norm));
  return out;
}

double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

double ks_critical_1pct(std::size_t n) {
  const double rn = std::sqrt(static_cast<double>(n));
  return 1.6276 / (rn + 0.12 + 0.11 / rn);
}

double quantile_type7(std::vector<double> xs, double prob) {
  std::sort(xs.begin(), xs.end());
  const double h = (static_cast<double>(xs.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (h - std::floor(h)) * (xs[hi] - xs[lo]);
}

}  // namespace oracle
