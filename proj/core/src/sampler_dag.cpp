#include "lingbayes/sampler_dag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "chain_internal.hpp"
#include "proposals.hpp"
#include "lingbayes/error.hpp"
#include "lingbayes/likelihood.hpp"

namespace lingbayes {

namespace {

using detail::CoefProposal;
using detail::log_mixture_prior;
using detail::log_normal_pdf;
using detail::log_odds;
using detail::MixtureMove;
using detail::MixtureProposal;

constexpr double kLog2Pi = detail::kLog2Pi;

class DagSampler {
 public:
  DagSampler(const Eigen::MatrixXd& Y, const ChainConfig& cfg, const SamplerControls& controls, Rng& rng)
      : Y_(Y), cfg_(cfg), controls_(controls), rng_(rng) {
    state_ = detail::initial_state(Y, cfg, controls, rng);
    if (!is_acyclic(state_.graph)) fail(ErrorCode::CyclicInput, "initial graph for the acyclic sampler has a cycle");
    const int p = state_.graph.size();
    for (int i = 0; i < p; ++i) {
      for (int j = 0; j < p; ++j) ordered_pairs_.emplace_back(i, j);
    }
  }

  Trace run(TraceMeta meta) {
    Trace trace{std::move(meta), {}};
    trace.samples.reserve(static_cast<std::size_t>(cfg_.sample_count()));
    for (int iter = 0; iter < cfg_.iterations; ++iter) {
      sweep(temperature(iter, cfg_));
      if (detail::should_record(iter, cfg_)) trace.samples.push_back(detail::snapshot(state_, iter));
      detail::report_progress(iter, cfg_, state_, ModelKind::Dag);
    }
    return trace;
  }

 private:
  NodeSuffStats node_stats(int i, const GaussianMixture& mix) const {
    const auto n = static_cast<std::size_t>(Y_.rows());
    std::vector<double> y(n), v(n);
    for (std::size_t q = 0; q < n; ++q) {
      const auto k = static_cast<std::size_t>(state_.z(static_cast<Eigen::Index>(q), i));
      y[q] = Y_(static_cast<Eigen::Index>(q), i) - mix.means[k];
      v[q] = mix.variances[k];
    }
    return node_suff_stats(y, Y_, v);
  }

  // log p(z_q = k | r_q, mix) for every component.
  static void label_log_probs(double r, const GaussianMixture& mix, std::vector<double>& out) {
    out.resize(static_cast<std::size_t>(mix.size()));
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < out.size(); ++k) {
      const double d = r - mix.means[k];
      out[k] = std::log(mix.weights[k]) - 0.5 * (kLog2Pi + std::log(mix.variances[k]) + d * d / mix.variances[k]);
      top = std::max(top, out[k]);
    }
    double total = 0.0;
    for (double lw : out) total += std::exp(lw - top);
    const double norm = top + std::log(total);
    for (auto& lw : out) lw -= norm;
  }

  void sweep(double T) {
    const int p = state_.graph.size();
    stats_.clear();
    for (int i = 0; i < p; ++i) stats_.push_back(node_stats(i, state_.noise.per_node[static_cast<std::size_t>(i)]));

    if (controls_.update_edges) {
      if (cfg_.random_scan) std::shuffle(ordered_pairs_.begin(), ordered_pairs_.end(), rng_.engine());
      for (const auto& [i, j] : ordered_pairs_) {
        if (i != j) gibbs_edge(i, j, T);
      }
      if (cfg_.pair_moves) {
        for (int a = 0; a < p; ++a) {
          for (int b = a + 1; b < p; ++b) collapsed_pair_move(a, b, T);
        }
      }
    }

    if (controls_.update_coefficients) {
      for (int i = 0; i < p; ++i) {
        const auto parents = state_.graph.parents(i);
        state_.B.row(i).setZero();
        const Eigen::VectorXd b = draw_coefficients(stats_[static_cast<std::size_t>(i)], parents, state_.gamma1, rng_);
        for (std::size_t a = 0; a < parents.size(); ++a) state_.B(i, parents[a]) = b[static_cast<Eigen::Index>(a)];
      }
    } else {
      for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) {
          if (!state_.graph(i, j)) state_.B(i, j) = 0.0;
        }
      }
    }

    if (controls_.update_edges && controls_.update_coefficients && controls_.update_noise && cfg_.pair_moves) {
      for (int a = 0; a < p; ++a) {
        for (int b = a + 1; b < p; ++b) {
          pair_move(a, b, T, static_cast<MixtureMove>(std::min(2, static_cast<int>(rng_.uniform() * 3.0))));
        }
      }
    }

    if (controls_.update_noise) detail::update_noise(state_, Y_, cfg_.mixture, rng_);
    detail::update_hyper(state_, cfg_, controls_, rng_);
  }

  void gibbs_edge(int i, int j, double T) {
    const bool present = state_.graph(i, j);
    // Adding j -> i closes a cycle iff i already reaches j.
    if (!present && state_.graph.reaches(i, j)) return;
    auto parents = state_.graph.parents(i);
    std::vector<int> without;
    for (int w : parents) {
      if (w != j) without.push_back(w);
    }
    std::vector<int> with = without;
    with.insert(std::upper_bound(with.begin(), with.end(), j), j);
    const auto& st = stats_[static_cast<std::size_t>(i)];
    const double l0 = collapsed_log_marginal(st, without, state_.gamma1);
    const double l1 = collapsed_log_marginal(st, with, state_.gamma1);
    const double logit = log_odds(state_.gamma) + (l1 - l0) / T;
    const double prob = 1.0 / (1.0 + std::exp(-logit));
    state_.graph.set(i, j, rng_.uniform() < prob);
  }

  // Pair state (none, b->a, a->b) proposed uniformly among the other two, or
  // nullopt when the proposal would close a cycle.
  std::optional<Graph> propose_pair(int a, int b) {
    const Graph& g = state_.graph;
    const int current = g(a, b) ? 1 : (g(b, a) ? 2 : 0);
    const int proposed = (current + (rng_.uniform() < 0.5 ? 1 : 2)) % 3;
    Graph next = g;
    next.set(a, b, false);
    next.set(b, a, false);
    if (proposed == 1) {
      if (next.reaches(a, b)) return std::nullopt;
      next.set(a, b, true);
    } else if (proposed == 2) {
      if (next.reaches(b, a)) return std::nullopt;
      next.set(b, a, true);
    }
    return next;
  }

  // Metropolis-Hastings move on the pair {a, b} with coefficients integrated
  // out and labels and mixtures held fixed.
  void collapsed_pair_move(int a, int b, double T) {
    auto next = propose_pair(a, b);
    if (!next) return;
    const Graph& g = state_.graph;
    const int edge_delta = next->edge_count() - g.edge_count();
    double log_accept = edge_delta != 0 ? edge_delta * log_odds(state_.gamma) : 0.0;
    if (log_accept == -std::numeric_limits<double>::infinity()) return;
    for (int t : {a, b}) {
      const auto& st = stats_[static_cast<std::size_t>(t)];
      log_accept += (collapsed_log_marginal(st, next->parents(t), state_.gamma1) -
                     collapsed_log_marginal(st, g.parents(t), state_.gamma1)) / T;
    }
    if (std::log(rng_.uniform()) < log_accept) state_.graph = std::move(*next);
  }

  // Metropolis-Hastings move on the pair {a, b} over the uncollapsed state,
  // run after the coefficient draw. Each node whose parent set changes gets a
  // new coefficient row from a least-squares Gaussian and new labels from
  // their conditionals; its mixture is kept, rescaled by the ratio of
  // least-squares residual scales (Jacobian s^(3K)), or redrawn from an
  // EM-centred independence proposal. The reverse proposal is scored on the
  // current coefficients, residuals and labels.
  void pair_move(int a, int b, double T, MixtureMove mode) {
    auto proposal = propose_pair(a, b);
    if (!proposal) return;
    Graph next = std::move(*proposal);
    const Graph& g = state_.graph;

    const int edge_delta = next.edge_count() - g.edge_count();
    double log_accept = 0.0;
    if (edge_delta != 0) log_accept += edge_delta * log_odds(state_.gamma);
    if (log_accept == -std::numeric_limits<double>::infinity()) return;

    struct Change {
      int node;
      std::vector<int> parents;
      Eigen::VectorXd coef;
      GaussianMixture mix;
      Eigen::VectorXi z;
    };
    std::vector<Change> changes;
    for (int t : {a, b}) {
      const auto old_parents = g.parents(t);
      const auto new_parents = next.parents(t);
      if (old_parents == new_parents) continue;
      const auto& mix = state_.noise.per_node[static_cast<std::size_t>(t)];
      const Eigen::VectorXi z_old = state_.z.col(t);

      Eigen::VectorXd b_old(static_cast<Eigen::Index>(old_parents.size()));
      for (std::size_t k = 0; k < old_parents.size(); ++k) b_old[static_cast<Eigen::Index>(k)] = state_.B(t, old_parents[k]);
      const CoefProposal coef_forward(Y_, t, new_parents);
      const CoefProposal coef_reverse(Y_, t, old_parents);
      const Eigen::VectorXd b_new = coef_forward.draw(rng_);
      const Eigen::VectorXd r_new = coef_forward.residuals(Y_, t, b_new);
      const Eigen::VectorXd r_old = coef_reverse.residuals(Y_, t, b_old);
      log_accept += coef_reverse.log_density(b_old) - coef_forward.log_density(b_new);
      log_accept += 0.5 * (b_old.squaredNorm() - b_new.squaredNorm()) / state_.gamma1 -
                    0.5 * (static_cast<double>(b_new.size()) - static_cast<double>(b_old.size())) *
                        (kLog2Pi + std::log(state_.gamma1));

      GaussianMixture moved = mix;
      if (mode == MixtureMove::Rescale) {
        const double scale = std::sqrt(coef_forward.residual_variance() / coef_reverse.residual_variance());
        for (auto& m : moved.means) m *= scale;
        for (auto& v : moved.variances) v *= scale * scale;
        log_accept += 3.0 * moved.size() * std::log(scale);
      } else if (mode == MixtureMove::Refit) {
        const MixtureProposal mix_forward(r_new, mix.size(), cfg_.mixture);
        const MixtureProposal mix_reverse(r_old, mix.size(), cfg_.mixture);
        moved = mix_forward.draw(rng_);
        log_accept += mix_reverse.log_density(mix) - mix_forward.log_density(moved);
      }
      log_accept += log_mixture_prior(moved, cfg_.mixture) - log_mixture_prior(mix, cfg_.mixture);

      Eigen::VectorXi z(z_old.size());
      double loglik_new = 0.0, loglik_old = 0.0;
      for (Eigen::Index q = 0; q < z.size(); ++q) {
        label_log_probs(r_new(q), moved, log_probs_);
        const auto k_new = moved.size() > 1 ? rng_.categorical_log(log_probs_) : std::size_t{0};
        log_accept += std::log(moved.weights[k_new]) - log_probs_[k_new];
        loglik_new += log_normal_pdf(r_new(q), moved.means[k_new], moved.variances[k_new]);
        label_log_probs(r_old(q), mix, log_probs_);
        const auto k_old = static_cast<std::size_t>(z_old(q));
        log_accept += log_probs_[k_old] - std::log(mix.weights[k_old]);
        loglik_old += log_normal_pdf(r_old(q), mix.means[k_old], mix.variances[k_old]);
        z(q) = static_cast<int>(k_new);
      }
      log_accept += (loglik_new - loglik_old) / T;
      changes.push_back({t, new_parents, b_new, moved, std::move(z)});
    }

    if (std::log(rng_.uniform()) < log_accept) {
      state_.graph = std::move(next);
      for (auto& c : changes) {
        state_.B.row(c.node).setZero();
        for (std::size_t k = 0; k < c.parents.size(); ++k) state_.B(c.node, c.parents[k]) = c.coef[static_cast<Eigen::Index>(k)];
        state_.noise.per_node[static_cast<std::size_t>(c.node)] = std::move(c.mix);
        state_.z.col(c.node) = c.z;
      }
    }
  }

  const Eigen::MatrixXd& Y_;
  const ChainConfig& cfg_;
  const SamplerControls& controls_;
  Rng& rng_;
  ChainState state_;
  std::vector<NodeSuffStats> stats_;
  std::vector<std::pair<int, int>> ordered_pairs_;
  std::vector<double> log_probs_;
};

}  // namespace

Trace run_dag_chain(const DataMatrix& data, const ChainConfig& cfg, const SamplerControls& controls,
                    std::uint64_t stream) {
  data.validate();
  cfg.validate();
  Rng rng(cfg.seed, stream);
  DagSampler sampler(data.values, cfg, controls, rng);
  return sampler.run(make_meta(data, cfg, ModelKind::Dag));
}

}  // namespace lingbayes
