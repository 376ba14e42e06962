#include "lingbayes/sampler_dcg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "chain_internal.hpp"
#include "proposals.hpp"
#include "lingbayes/error.hpp"
#include "lingbayes/likelihood.hpp"

namespace lingbayes {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log|det(I - B)|, or -inf past the determinant guard.
double guarded_log_det(const Eigen::MatrixXd& B) {
  try {
    return log_abs_det_i_minus_b(B);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SingularSystem) return kNegInf;
    throw;
  }
}

// Likelihood terms of node i's structural equation for coefficient row `row`.
double node_log_likelihood(const Eigen::MatrixXd& Y, const Eigen::RowVectorXd& row, int i,
                           const GaussianMixture& mix) {
  const Eigen::VectorXd r = Y.col(i) - Y * row.transpose();
  double total = 0.0;
  for (Eigen::Index q = 0; q < r.size(); ++q) total += log_density(r[q], mix);
  return total;
}

// Tempered log likelihood ratio for replacing row i of B by `row`, or -inf
// when the proposal violates the determinant guard.
double row_change_log_ratio(const ChainState& state, int i, const Eigen::RowVectorXd& row,
                            const Eigen::MatrixXd& Y, double T) {
  Eigen::MatrixXd B_new = state.B;
  B_new.row(i) = row;
  const double det_new = guarded_log_det(B_new);
  if (det_new == kNegInf) return kNegInf;
  const double det_old = log_abs_det_i_minus_b(state.B);
  const auto& mix = state.noise.per_node[static_cast<std::size_t>(i)];
  const double n = static_cast<double>(Y.rows());
  const double delta = n * (det_new - det_old) + node_log_likelihood(Y, row, i, mix) -
                       node_log_likelihood(Y, state.B.row(i), i, mix);
  return delta / T;
}

double log_normal_kernel(double x, double variance) { return -0.5 * x * x / variance; }

double node_log_likelihood(const Eigen::VectorXd& r, const GaussianMixture& mix) {
  double total = 0.0;
  for (Eigen::Index q = 0; q < r.size(); ++q) total += log_density(r[q], mix);
  return total;
}

// Metropolis-Hastings move on the pair {a, b}: the pair's edge state moves to
// one of the other three configurations, and each node whose parent set
// changes gets a coefficient row from a least-squares Gaussian and a mixture
// that is kept, rescaled by the ratio of least-squares residual scales, or
// redrawn from an EM-centred proposal.
void pair_refresh(ChainState& state, int a, int b, const Eigen::MatrixXd& Y, const MoveContext& ctx,
                  const MixtureHyper& hyper, detail::MixtureMove mode, Rng& rng) {
  using detail::MixtureMove;
  const Graph& g = state.graph;
  const int current = (g(a, b) ? 1 : 0) | (g(b, a) ? 2 : 0);
  const int proposed = (current + 1 + std::min(2, static_cast<int>(rng.uniform() * 3.0))) % 4;
  Graph next = g;
  next.set(a, b, false);
  next.set(b, a, false);
  if (ctx.forbid_cycles) {
    if (proposed == 3) return;
    if (proposed == 1 && next.reaches(a, b)) return;
    if (proposed == 2 && next.reaches(b, a)) return;
  }
  next.set(a, b, (proposed & 1) != 0);
  next.set(b, a, (proposed & 2) != 0);

  const int edge_delta = next.edge_count() - g.edge_count();
  double log_accept = edge_delta != 0 ? edge_delta * detail::log_odds(state.gamma) : 0.0;
  if (log_accept == kNegInf) return;

  Eigen::MatrixXd B_new = state.B;
  std::vector<std::pair<int, GaussianMixture>> mixtures;
  double loglik = 0.0;
  for (int t : {a, b}) {
    const auto old_parents = g.parents(t);
    const auto new_parents = next.parents(t);
    if (old_parents == new_parents) continue;
    const auto& mix = state.noise.per_node[static_cast<std::size_t>(t)];
    Eigen::VectorXd b_old(static_cast<Eigen::Index>(old_parents.size()));
    for (std::size_t k = 0; k < old_parents.size(); ++k) b_old[static_cast<Eigen::Index>(k)] = state.B(t, old_parents[k]);
    const detail::CoefProposal forward(Y, t, new_parents);
    const detail::CoefProposal reverse(Y, t, old_parents);
    const Eigen::VectorXd b_new = forward.draw(rng);
    const Eigen::VectorXd r_new = forward.residuals(Y, t, b_new);
    const Eigen::VectorXd r_old = reverse.residuals(Y, t, b_old);
    log_accept += reverse.log_density(b_old) - forward.log_density(b_new);
    log_accept += 0.5 * (b_old.squaredNorm() - b_new.squaredNorm()) / state.gamma1 -
                  0.5 * (static_cast<double>(b_new.size()) - static_cast<double>(b_old.size())) *
                      (detail::kLog2Pi + std::log(state.gamma1));

    GaussianMixture moved = mix;
    if (mode == MixtureMove::Rescale) {
      const double scale = std::sqrt(forward.residual_variance() / reverse.residual_variance());
      for (auto& m : moved.means) m *= scale;
      for (auto& v : moved.variances) v *= scale * scale;
      log_accept += 3.0 * moved.size() * std::log(scale);
    } else if (mode == MixtureMove::Refit) {
      const detail::MixtureProposal mix_forward(r_new, mix.size(), hyper);
      const detail::MixtureProposal mix_reverse(r_old, mix.size(), hyper);
      moved = mix_forward.draw(rng);
      log_accept += mix_reverse.log_density(mix) - mix_forward.log_density(moved);
    }
    log_accept += detail::log_mixture_prior(moved, hyper) - detail::log_mixture_prior(mix, hyper);
    loglik += node_log_likelihood(r_new, moved) - node_log_likelihood(r_old, mix);

    B_new.row(t).setZero();
    for (std::size_t k = 0; k < new_parents.size(); ++k) B_new(t, new_parents[k]) = b_new[static_cast<Eigen::Index>(k)];
    mixtures.emplace_back(t, std::move(moved));
  }

  const double det_new = guarded_log_det(B_new);
  if (det_new == kNegInf) return;
  loglik += static_cast<double>(Y.rows()) * (det_new - log_abs_det_i_minus_b(state.B));
  log_accept += loglik / ctx.temperature;
  if (std::isnan(log_accept) || !(std::log(rng.uniform()) < log_accept)) return;

  state.graph = std::move(next);
  state.B = std::move(B_new);
  for (auto& [t, mix] : mixtures) state.noise.per_node[static_cast<std::size_t>(t)] = std::move(mix);
}

}  // namespace

bool mh_edge_toggle(ChainState& state, int i, int j, const Eigen::MatrixXd& Y, const MoveContext& ctx, Rng& rng) {
  if (i == j) fail(ErrorCode::InvalidArgument, "edge toggle on a self-loop");
  const bool birth = !state.graph(i, j);
  if (birth && ctx.forbid_cycles && state.graph.reaches(i, j)) return false;

  Eigen::RowVectorXd row = state.B.row(i);
  row[j] = birth ? rng.normal(0.0, std::sqrt(state.gamma1)) : 0.0;
  // The slab density of the born coefficient cancels against its proposal.
  const double prior_odds = std::log(state.gamma) - std::log1p(-state.gamma);
  double log_accept = row_change_log_ratio(state, i, row, Y, ctx.temperature);
  if (log_accept == kNegInf) return false;
  log_accept += birth ? prior_odds : -prior_odds;
  if (std::isnan(log_accept) || !(std::log(rng.uniform()) < log_accept)) return false;

  state.graph.set(i, j, birth);
  state.B.row(i) = row;
  return true;
}

bool mh_coefficient_update(ChainState& state, int i, int j, const Eigen::MatrixXd& Y, const MoveContext& ctx,
                           Rng& rng) {
  if (!state.graph(i, j)) fail(ErrorCode::InvalidArgument, "coefficient move on an absent edge");
  const double current = state.B(i, j);
  const double proposal = ctx.mh_step > 0.0 ? current + ctx.mh_step * rng.normal() : current;
  Eigen::RowVectorXd row = state.B.row(i);
  row[j] = proposal;
  double log_accept = row_change_log_ratio(state, i, row, Y, ctx.temperature);
  if (log_accept == kNegInf) return false;
  log_accept += log_normal_kernel(proposal, state.gamma1) - log_normal_kernel(current, state.gamma1);
  if (!(std::log(rng.uniform()) < log_accept)) return false;
  state.B(i, j) = proposal;
  return true;
}

Trace run_dcg_chain(const DataMatrix& data, const ChainConfig& cfg, const SamplerControls& controls,
                    std::uint64_t stream) {
  data.validate();
  cfg.validate();
  const Eigen::MatrixXd& Y = data.values;
  Rng rng(cfg.seed, stream);
  ChainState state = detail::initial_state(Y, cfg, controls, rng);
  if (guarded_log_det(state.B) == kNegInf) fail(ErrorCode::SingularSystem, "initial I - B is singular");

  const int p = state.graph.size();
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      if (i != j) pairs.emplace_back(i, j);
    }
  }

  Trace trace{make_meta(data, cfg, ModelKind::Dcg), {}};
  trace.samples.reserve(static_cast<std::size_t>(cfg.sample_count()));
  double log_step = std::log(std::max(cfg.mh_step, 1e-300));
  for (int iter = 0; iter < cfg.iterations; ++iter) {
    const MoveContext ctx{temperature(iter, cfg), cfg.mh_step > 0.0 ? std::exp(log_step) : 0.0,
                          controls.forbid_cycles};

    if (controls.update_edges) {
      if (cfg.random_scan) std::shuffle(pairs.begin(), pairs.end(), rng.engine());
      for (const auto& [i, j] : pairs) mh_edge_toggle(state, i, j, Y, ctx, rng);
    }

    if (controls.update_coefficients) {
      int proposed = 0, accepted = 0;
      for (const auto& e : state.graph.edges()) {
        ++proposed;
        accepted += mh_coefficient_update(state, e.target, e.source, Y, ctx, rng) ? 1 : 0;
      }
      if (cfg.adapt && iter < cfg.burn_in && proposed > 0) {
        const double rate = static_cast<double>(accepted) / proposed;
        log_step += (rate - 0.44) / std::sqrt(static_cast<double>(iter) + 1.0);
      }
    }

    if (controls.update_edges && controls.update_coefficients && cfg.pair_moves) {
      for (int a = 0; a < p; ++a) {
        for (int b = a + 1; b < p; ++b) {
          const int mode = controls.update_noise ? std::min(2, static_cast<int>(rng.uniform() * 3.0)) : 0;
          pair_refresh(state, a, b, Y, ctx, cfg.mixture, static_cast<detail::MixtureMove>(mode), rng);
        }
      }
    }

    if (controls.update_noise) detail::update_noise(state, Y, cfg.mixture, rng);
    detail::update_hyper(state, cfg, controls, rng);

    if (detail::should_record(iter, cfg)) trace.samples.push_back(detail::snapshot(state, iter));
    detail::report_progress(iter, cfg, state, ModelKind::Dcg);
  }
  return trace;
}

}  // namespace lingbayes
