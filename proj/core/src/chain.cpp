#include "lingbayes/chain.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iostream>
#include <thread>

#include <fmt/format.h>

#include "chain_internal.hpp"
#include "lingbayes/error.hpp"
#include "lingbayes/sampler_dag.hpp"
#include "lingbayes/sampler_dcg.hpp"

namespace lingbayes {

void PriorHyper::validate() const {
  if (!(a_gamma > 0.0 && b_gamma > 0.0 && a_gamma1 > 0.0 && b_gamma1 > 0.0)) {
    fail(ErrorCode::InvalidArgument, "prior hyperparameters must be strictly positive");
  }
}

std::string_view to_string(ModelKind kind) { return kind == ModelKind::Dag ? "dag" : "dcg"; }

ModelKind parse_model_kind(std::string_view text) {
  if (text == "dag") return ModelKind::Dag;
  if (text == "dcg") return ModelKind::Dcg;
  fail(ErrorCode::InvalidArgument, fmt::format("unknown model kind '{}'", text));
}

void ChainConfig::validate() const {
  if (iterations < 1) fail(ErrorCode::InvalidArgument, "iterations must be positive");
  if (burn_in < 0 || burn_in >= iterations) fail(ErrorCode::InvalidArgument, "burn-in must lie in [0, iterations)");
  if (thin < 1) fail(ErrorCode::InvalidArgument, "thin must be at least 1");
  if (!(anneal_T0 >= 1.0)) fail(ErrorCode::InvalidArgument, "anneal T0 must be at least 1");
  if (K < 1) fail(ErrorCode::InvalidArgument, "mixture size K must be at least 1");
  if (!(mh_step >= 0.0)) fail(ErrorCode::InvalidArgument, "mh step must be nonnegative");
  prior.validate();
  mixture.validate();
}

BetaParams gamma_posterior(const Graph& graph, const PriorHyper& prior) {
  const double p = graph.size();
  const double edges = graph.edge_count();
  return {prior.a_gamma + edges, prior.b_gamma + p * (p - 1.0) - edges};
}

InvGammaParams gamma1_posterior(const Eigen::MatrixXd& B, const Graph& graph, const PriorHyper& prior) {
  double ss = 0.0;
  int count = 0;
  for (const auto& e : graph.edges()) {
    const double b = B(e.target, e.source);
    ss += b * b;
    ++count;
  }
  return {prior.a_gamma1 + 0.5 * count, prior.b_gamma1 + 0.5 * ss};
}

double update_gamma(const Graph& graph, const PriorHyper& prior, Rng& rng) {
  const auto post = gamma_posterior(graph, prior);
  return rng.beta(post.a, post.b);
}

double update_gamma1(const Eigen::MatrixXd& B, const Graph& graph, const PriorHyper& prior, Rng& rng) {
  const auto post = gamma1_posterior(B, graph, prior);
  return rng.inv_gamma(post.shape, post.scale);
}

double temperature(int iter, const ChainConfig& cfg) {
  if (iter >= cfg.burn_in) return 1.0;
  const double frac = static_cast<double>(iter) / static_cast<double>(cfg.burn_in);
  return std::pow(cfg.anneal_T0, 1.0 - frac);
}

TraceMeta make_meta(const DataMatrix& data, const ChainConfig& cfg, ModelKind kind) {
  TraceMeta meta;
  meta.model_kind = kind;
  meta.p = data.p();
  meta.n = data.n();
  meta.K = cfg.K;
  meta.seed = cfg.seed;
  meta.config = cfg;
  meta.names = data.names;
  meta.center = data.center;
  meta.scale = data.scale;
  return meta;
}

Trace run_chains(const DataMatrix& data, const ChainConfig& cfg, ModelKind kind, int chains,
                 const SamplerControls& controls) {
  if (chains < 1) fail(ErrorCode::InvalidArgument, "need at least one chain");
  std::vector<Trace> traces(static_cast<std::size_t>(chains));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(chains));
  auto run_one = [&](int c) {
    try {
      const auto stream = static_cast<std::uint64_t>(c);
      traces[static_cast<std::size_t>(c)] = kind == ModelKind::Dag ? run_dag_chain(data, cfg, controls, stream)
                                                                     : run_dcg_chain(data, cfg, controls, stream);
    } catch (...) {
      errors[static_cast<std::size_t>(c)] = std::current_exception();
    }
  };
  if (chains == 1) {
    run_one(0);
  } else {
    std::vector<std::thread> workers;
    for (int c = 0; c < chains; ++c) workers.emplace_back(run_one, c);
    for (auto& w : workers) w.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  Trace out;
  out.meta = traces.front().meta;
  out.meta.chains = chains;
  for (auto& t : traces) {
    for (auto& s : t.samples) out.samples.push_back(std::move(s));
  }
  return out;
}

namespace detail {

std::vector<double> node_residuals(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& B, int i) {
  const Eigen::VectorXd r = Y.col(i) - Y * B.row(i).transpose();
  return {r.data(), r.data() + r.size()};
}

namespace {

GaussianMixture initial_mixture(std::vector<double> residuals, int K) {
  std::sort(residuals.begin(), residuals.end());
  const auto n = residuals.size();
  double mean = 0.0;
  for (double r : residuals) mean += r;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double r : residuals) var += (r - mean) * (r - mean);
  var /= static_cast<double>(n - 1);
  GaussianMixture mix = GaussianMixture::standard(K);
  for (int k = 0; k < K; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    const auto idx = static_cast<std::size_t>((k + 0.5) / K * static_cast<double>(n));
    mix.means[kk] = K == 1 ? mean : residuals[std::min(idx, n - 1)];
    mix.variances[kk] = std::max(var / K, 1e-6);
  }
  return mix;
}

}  // namespace

ChainState initial_state(const Eigen::MatrixXd& Y, const ChainConfig& cfg, const SamplerControls& controls,
                         Rng& rng) {
  const int p = static_cast<int>(Y.cols());
  ChainState s;
  s.graph = controls.initial_graph.value_or(Graph(p));
  if (s.graph.size() != p) fail(ErrorCode::DimensionMismatch, "initial graph size differs from the data");
  s.B = controls.initial_coefficients.value_or(Eigen::MatrixXd::Zero(p, p));
  if (s.B.rows() != p || s.B.cols() != p) fail(ErrorCode::DimensionMismatch, "initial coefficients have the wrong shape");
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      if (!s.graph(i, j)) s.B(i, j) = 0.0;
    }
  }
  s.gamma = controls.fixed_gamma.value_or(0.5);
  const auto& pr = cfg.prior;
  s.gamma1 = controls.initial_gamma1.value_or(pr.a_gamma1 > 1.0 ? pr.b_gamma1 / (pr.a_gamma1 - 1.0) : pr.b_gamma1);
  if (controls.initial_noise) {
    s.noise = *controls.initial_noise;
    if (static_cast<int>(s.noise.per_node.size()) != p) fail(ErrorCode::DimensionMismatch, "initial noise model size");
    for (const auto& m : s.noise.per_node) m.validate();
  } else {
    for (int i = 0; i < p; ++i) s.noise.per_node.push_back(initial_mixture(node_residuals(Y, s.B, i), cfg.K));
  }
  s.z = Eigen::MatrixXi::Zero(Y.rows(), p);
  for (int i = 0; i < p; ++i) {
    const auto r = node_residuals(Y, s.B, i);
    const auto labels = gibbs_update_indicators(r, s.noise.per_node[static_cast<std::size_t>(i)], rng);
    for (std::size_t q = 0; q < labels.size(); ++q) s.z(static_cast<Eigen::Index>(q), i) = labels[q];
  }
  return s;
}

void update_noise(ChainState& state, const Eigen::MatrixXd& Y, const MixtureHyper& hyper, Rng& rng) {
  const int p = state.graph.size();
  for (int i = 0; i < p; ++i) {
    auto& mix = state.noise.per_node[static_cast<std::size_t>(i)];
    const auto r = node_residuals(Y, state.B, i);
    const auto labels = gibbs_update_indicators(r, mix, rng);
    for (std::size_t q = 0; q < labels.size(); ++q) state.z(static_cast<Eigen::Index>(q), i) = labels[q];
    mix = gibbs_update_mixture(r, labels, mix, hyper, rng);
  }
}

void update_hyper(ChainState& state, const ChainConfig& cfg, const SamplerControls& controls, Rng& rng) {
  if (controls.update_gamma && !controls.fixed_gamma) state.gamma = update_gamma(state.graph, cfg.prior, rng);
  if (controls.update_gamma1) state.gamma1 = update_gamma1(state.B, state.graph, cfg.prior, rng);
}

bool should_record(int iter, const ChainConfig& cfg) {
  return iter >= cfg.burn_in && (iter - cfg.burn_in + 1) % cfg.thin == 0;
}

Sample snapshot(const ChainState& state, int iter) {
  return Sample{iter, state.graph, state.B, state.gamma, state.gamma1, state.noise};
}

void report_progress(int iter, const ChainConfig& cfg, const ChainState& state, ModelKind kind) {
  if (cfg.progress_every <= 0 || (iter + 1) % cfg.progress_every != 0) return;
  std::cerr << fmt::format("[{}] sweep {}/{} T={:.3f} edges={} gamma={:.3f} gamma1={:.3f}\n", to_string(kind),
                           iter + 1, cfg.iterations, temperature(iter, cfg), state.graph.edge_count(), state.gamma,
                           state.gamma1);
}

}  // namespace detail

}  // namespace lingbayes
