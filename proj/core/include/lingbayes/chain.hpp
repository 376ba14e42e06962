#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lingbayes/data.hpp"
#include "lingbayes/graph.hpp"
#include "lingbayes/noise.hpp"
#include "lingbayes/rng.hpp"

namespace lingbayes {

// Beta(a_gamma, b_gamma) on the edge inclusion probability and
// Inverse-Gamma(a_gamma1, b_gamma1) on the slab variance.
struct PriorHyper {
  double a_gamma = 1.0;
  double b_gamma = 1.0;
  double a_gamma1 = 2.0;
  double b_gamma1 = 1.0;

  void validate() const;
  friend bool operator==(const PriorHyper&, const PriorHyper&) = default;
};

enum class ModelKind { Dag, Dcg };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

struct ChainConfig {
  int iterations = 20000;
  int burn_in = 10000;
  int thin = 10;
  double anneal_T0 = 5.0;
  std::uint64_t seed = 1;
  PriorHyper prior;
  int K = 2;
  MixtureHyper mixture;
  // Random-walk standard deviation for coefficient moves (cyclic sampler).
  double mh_step = 0.1;
  // Robbins-Monro tuning of mh_step toward 0.44 acceptance, burn-in only.
  bool adapt = false;
  bool random_scan = false;
  // Joint moves on each unordered pair's edge state that also refresh the
  // affected nodes' coefficients and noise mixtures.
  bool pair_moves = true;
  // Sweeps between progress lines on stderr; 0 disables.
  int progress_every = 0;

  void validate() const;
  int sample_count() const { return (iterations - burn_in) / thin; }

  friend bool operator==(const ChainConfig&, const ChainConfig&) = default;
};

// Switches that freeze parts of the sampler or pin its starting point.
// Used by tests and oracle checks; the defaults run the full sampler.
struct SamplerControls {
  bool update_edges = true;
  bool update_coefficients = true;
  bool update_noise = true;
  bool update_gamma = true;
  bool update_gamma1 = true;
  // Cyclic sampler only: reject births that would close a cycle.
  bool forbid_cycles = false;
  std::optional<double> fixed_gamma;
  std::optional<Graph> initial_graph;
  std::optional<Eigen::MatrixXd> initial_coefficients;
  std::optional<NoiseModel> initial_noise;
  std::optional<double> initial_gamma1;
};

struct ChainState {
  Graph graph;
  Eigen::MatrixXd B;
  double gamma = 0.5;
  double gamma1 = 1.0;
  NoiseModel noise;
  // n x p component labels (0-based) for every observation and node.
  Eigen::MatrixXi z;
};

// One recorded posterior draw.
struct Sample {
  int iteration = 0;
  Graph graph;
  Eigen::MatrixXd B;
  double gamma = 0.0;
  double gamma1 = 0.0;
  NoiseModel noise;

  friend bool operator==(const Sample& a, const Sample& b) {
    return a.iteration == b.iteration && a.graph == b.graph && a.B == b.B && a.gamma == b.gamma &&
           a.gamma1 == b.gamma1 && a.noise == b.noise;
  }
};

struct TraceMeta {
  int format_version = 1;
  ModelKind model_kind = ModelKind::Dag;
  int p = 0;
  int n = 0;
  int K = 0;
  std::uint64_t seed = 0;
  int chains = 1;
  ChainConfig config;
  std::string created;
  std::vector<std::string> names;
  std::vector<double> center;
  std::vector<double> scale;

  friend bool operator==(const TraceMeta&, const TraceMeta&) = default;
};

struct Trace {
  TraceMeta meta;
  std::vector<Sample> samples;

  friend bool operator==(const Trace&, const Trace&) = default;
};

struct BetaParams {
  double a;
  double b;
};
struct InvGammaParams {
  double shape;
  double scale;
};

BetaParams gamma_posterior(const Graph& graph, const PriorHyper& prior);
InvGammaParams gamma1_posterior(const Eigen::MatrixXd& B, const Graph& graph, const PriorHyper& prior);

double update_gamma(const Graph& graph, const PriorHyper& prior, Rng& rng);
double update_gamma1(const Eigen::MatrixXd& B, const Graph& graph, const PriorHyper& prior, Rng& rng);

// Geometric annealing T0^(1 - iter/burn_in) during burn-in, exactly 1 after.
double temperature(int iter, const ChainConfig& cfg);

TraceMeta make_meta(const DataMatrix& data, const ChainConfig& cfg, ModelKind kind);

// Concatenates independently seeded chains (chain c uses stream c of
// cfg.seed) in chain order. Chains run on separate threads.
Trace run_chains(const DataMatrix& data, const ChainConfig& cfg, ModelKind kind, int chains,
                 const SamplerControls& controls = {});

}  // namespace lingbayes
