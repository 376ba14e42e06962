#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <functional>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <thread>

#include <unistd.h>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "lingbayes/chain.hpp"
#include "lingbayes/error.hpp"
#include "lingbayes/graph.hpp"
#include "lingbayes/likelihood.hpp"
#include "lingbayes/summary.hpp"
#include "lingbayes/trace_io.hpp"

namespace lingbayes::cli {

namespace {

struct SampleArgs {
  std::string data_path;
  std::string out_path;
  ChainConfig cfg;
  int chains = 1;
  bool no_standardize = false;
  bool no_pair_moves = false;
  bool stamp_time = false;
};

void add_chain_options(CLI::App& cmd, SampleArgs& a, bool cyclic) {
  cmd.add_option("data", a.data_path, "Input CSV (rows = observations)")->required()->check(CLI::ExistingFile);
  cmd.add_option("--out", a.out_path, "Trace file to write")->required();
  cmd.add_option("--iters", a.cfg.iterations, "Sweeps")->capture_default_str();
  cmd.add_option("--burn-in", a.cfg.burn_in, "Burn-in sweeps (annealed)")->capture_default_str();
  cmd.add_option("--thin", a.cfg.thin, "Keep every thin-th post-burn-in sweep")->capture_default_str();
  cmd.add_option("--k", a.cfg.K, "Gaussian mixture components per node")->capture_default_str();
  cmd.add_option("--seed", a.cfg.seed, "Random seed")->capture_default_str();
  cmd.add_option("--anneal-t0", a.cfg.anneal_T0, "Initial annealing temperature")->capture_default_str();
  cmd.add_option("--a-gamma", a.cfg.prior.a_gamma, "Beta prior on edge probability: a")->capture_default_str();
  cmd.add_option("--b-gamma", a.cfg.prior.b_gamma, "Beta prior on edge probability: b")->capture_default_str();
  cmd.add_option("--a-gamma1", a.cfg.prior.a_gamma1, "Inverse-Gamma prior on slab variance: shape")
      ->capture_default_str();
  cmd.add_option("--b-gamma1", a.cfg.prior.b_gamma1, "Inverse-Gamma prior on slab variance: scale")
      ->capture_default_str();
  cmd.add_option("--chains", a.chains, "Independently seeded chains, concatenated")->capture_default_str();
  cmd.add_option("--progress", a.cfg.progress_every, "Sweeps between progress lines on stderr (0 = off)")
      ->capture_default_str();
  cmd.add_flag("--no-standardize", a.no_standardize, "Keep the raw data scale");
  cmd.add_flag("--random-scan", a.cfg.random_scan, "Visit edge pairs in random order");
  if (cyclic) {
    cmd.add_option("--mh-step", a.cfg.mh_step, "Random-walk step for coefficients")->capture_default_str();
    cmd.add_flag("--adapt", a.cfg.adapt, "Tune the step toward 0.44 acceptance during burn-in");
  }
  cmd.add_flag("--no-pair-moves", a.no_pair_moves, "Disable joint moves on node pairs");
  cmd.add_flag("--stamp-time", a.stamp_time, "Record the wall-clock time in the trace header");
}

std::string iso_utc(std::time_t t) {
  std::tm tm{};
  ::gmtime_r(&t, &tm);
  return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}Z", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                     tm.tm_min, tm.tm_sec);
}

std::string created_stamp(bool wall_clock) {
  if (wall_clock) return iso_utc(std::chrono::system_clock::to_time_t(std::chrono::system_clock::now()));
  // Default keeps trace files byte-reproducible.
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) return iso_utc(static_cast<std::time_t>(std::atoll(epoch)));
  return iso_utc(0);
}

int run_sampler(const SampleArgs& a, ModelKind kind, std::ostream& out) {
  ChainConfig cfg = a.cfg;
  cfg.pair_moves = !a.no_pair_moves;
  const auto data = read_data_csv(a.data_path, CsvOptions{!a.no_standardize});
  Trace trace = run_chains(data, cfg, kind, a.chains);
  trace.meta.created = created_stamp(a.stamp_time);
  write_trace(trace, a.out_path);
  out << fmt::format("wrote {} samples ({} chain{}) to {}\n", trace.samples.size(), a.chains, a.chains == 1 ? "" : "s",
                     a.out_path);
  return 0;
}

int summary_workers() {
  int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* cap = std::getenv("CYCLIN_THREADS")) {
    const int n = std::atoi(cap);
    if (n >= 1) workers = std::min(workers, n);
  }
  return workers;
}

// custom:<cmd> runs `<cmd> <file>` once. The file lists "p v" and then one
// line per unique graph with its p*p indicator matrix row-major as 0/1
// characters; the command prints v lines of v nonnegative numbers, row l
// holding d(G_l, G_u).
GraphDistance subprocess_distance(const std::string& command, const Trace& trace) {
  const auto graphs = trace_graphs(trace);
  const auto set = unique_graphs(graphs);
  const auto v = set.graphs.size();
  const int p = trace.meta.p;

  const auto path = std::filesystem::temp_directory_path() /
                    fmt::format("lingbayes-graphs-{}-{}.txt", static_cast<long long>(::getpid()), v);
  {
    std::ofstream f(path);
    f << p << ' ' << v << '\n';
    for (const auto& g : set.graphs) {
      for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) f << (g(i, j) ? '1' : '0');
      }
      f << '\n';
    }
  }
  const std::string full = fmt::format("{} '{}'", command, path.string());
  FILE* pipe = ::popen(full.c_str(), "r");
  if (!pipe) fail(ErrorCode::IoError, fmt::format("cannot run custom distance command '{}'", command));
  std::string output;
  char buffer[4096];
  std::size_t got = 0;
  while ((got = std::fread(buffer, 1, sizeof buffer, pipe)) > 0) output.append(buffer, got);
  const int status = ::pclose(pipe);
  std::filesystem::remove(path);
  if (status != 0) fail(ErrorCode::IoError, fmt::format("custom distance command exited with status {}", status));

  std::istringstream in(output);
  auto table = std::make_shared<std::vector<double>>(v * v);
  for (auto& x : *table) {
    if (!(in >> x)) fail(ErrorCode::InvalidArgument, fmt::format("custom distance command must print {}x{} numbers", v, v));
  }
  auto index = std::make_shared<std::map<std::string, std::size_t>>();
  for (std::size_t u = 0; u < v; ++u) (*index)[set.keys[u]] = u;

  GraphDistance d;
  d.kind = DistanceKind::Custom;
  d.custom_fn = [table, index, v](const Graph& a, const Graph& b) {
    return (*table)[index->at(canonical_key(a)) * v + index->at(canonical_key(b))];
  };
  return d;
}

GraphDistance parse_metric(const std::string& metric, const Trace& trace) {
  if (metric == "shd") return {DistanceKind::ShdStandard, {}};
  if (metric == "shd-hamming") return {DistanceKind::ShdHamming, {}};
  if (metric == "sid") {
    if (trace.meta.model_kind == ModelKind::Dcg) fail(ErrorCode::SidOnCyclic, "SID is only applicable to DAGs");
    return {DistanceKind::Sid, {}};
  }
  if (metric.rfind("custom:", 0) == 0 && metric.size() > 7) return subprocess_distance(metric.substr(7), trace);
  fail(ErrorCode::InvalidArgument, fmt::format("unknown metric '{}'", metric));
}

// "j>i,k>l" with 1-based node numbers.
std::vector<Edge> parse_edges(const std::string& text, int p) {
  std::vector<Edge> edges;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto gt = item.find('>');
    if (gt == std::string::npos) fail(ErrorCode::InvalidArgument, fmt::format("edge '{}' is not of the form j>i", item));
    int source = 0, target = 0;
    try {
      source = std::stoi(item.substr(0, gt));
      target = std::stoi(item.substr(gt + 1));
    } catch (const std::exception&) {
      fail(ErrorCode::InvalidArgument, fmt::format("edge '{}' is not of the form j>i", item));
    }
    if (source < 1 || target < 1 || source > p || target > p) {
      fail(ErrorCode::IndexOutOfRange, fmt::format("edge '{}' names a node outside 1..{}", item, p));
    }
    edges.push_back({source - 1, target - 1});
  }
  return edges;
}

std::vector<int> parse_nodes(const std::string& text, int p) {
  std::vector<int> nodes;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    int v = 0;
    try {
      v = std::stoi(item);
    } catch (const std::exception&) {
      fail(ErrorCode::InvalidArgument, fmt::format("node '{}' is not a number", item));
    }
    if (v < 1 || v > p) fail(ErrorCode::IndexOutOfRange, fmt::format("node {} outside 1..{}", v, p));
    nodes.push_back(v - 1);
  }
  return nodes;
}

GaussianMixture parse_mixture(const std::string& text) {
  if (text == "gaussian") return GaussianMixture::standard(1);
  if (text == "bimodal") return GaussianMixture{{0.5, 0.5}, {-1.0, 1.0}, {0.2, 0.2}};
  GaussianMixture mix;
  std::stringstream ss(text);
  std::string component;
  while (std::getline(ss, component, '|')) {
    double w = 0, m = 0, v = 0;
    char c1 = 0, c2 = 0;
    std::istringstream cs(component);
    if (!(cs >> w >> c1 >> m >> c2 >> v) || c1 != ',' || c2 != ',') {
      fail(ErrorCode::InvalidArgument, fmt::format("noise component '{}' is not 'weight,mean,variance'", component));
    }
    mix.weights.push_back(w);
    mix.means.push_back(m);
    mix.variances.push_back(v);
  }
  mix.validate();
  return mix;
}

// One mixture for every node, or p mixtures separated by ';'.
NoiseModel parse_noise(const std::string& text, int p) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) parts.push_back(item);
  if (parts.size() != 1 && static_cast<int>(parts.size()) != p) {
    fail(ErrorCode::DimensionMismatch, fmt::format("noise spec has {} node entries for {} nodes", parts.size(), p));
  }
  NoiseModel noise;
  for (int i = 0; i < p; ++i) noise.per_node.push_back(parse_mixture(parts.size() == 1 ? parts[0] : parts[static_cast<std::size_t>(i)]));
  return noise;
}

void with_output(const std::string& path, std::ostream& fallback, const std::function<void(std::ostream&)>& body) {
  if (path.empty()) {
    body(fallback);
    return;
  }
  std::ofstream f(path);
  if (!f) fail(ErrorCode::IoError, fmt::format("cannot write {}", path));
  body(f);
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian causal discovery for linear non-Gaussian acyclic and cyclic SEMs", "lingbayes"};
  app.require_subcommand(1);

  SampleArgs dag_args, dcg_args;
  auto* sample_dag = app.add_subcommand("sample-dag", "Collapsed Gibbs sampler over DAGs");
  add_chain_options(*sample_dag, dag_args, false);
  auto* sample_dcg = app.add_subcommand("sample-dcg", "Gibbs-within-Metropolis sampler over cyclic graphs");
  add_chain_options(*sample_dcg, dcg_args, true);

  std::string trace_path, metric = "shd", out_path;
  auto* point = app.add_subcommand("point-graph", "Posterior weighted-medoid graph");
  point->add_option("trace", trace_path, "Trace file")->required()->check(CLI::ExistingFile);
  point->add_option("--metric", metric, "shd | shd-hamming | sid | custom:<cmd>")->capture_default_str();
  point->add_option("--out", out_path, "Also write the selected graph in adjacency format");

  double level = 0.95;
  std::string method = "hpd", scope = "marginal", scale = "original", edge_text;
  auto* intervals = app.add_subcommand("intervals", "Credible intervals for coefficients");
  intervals->add_option("trace", trace_path, "Trace file")->required()->check(CLI::ExistingFile);
  intervals->add_option("--level", level, "Credible level")->capture_default_str();
  intervals->add_option("--method", method, "hpd | equal-tailed")
      ->capture_default_str()
      ->check(CLI::IsMember({"hpd", "equal-tailed"}));
  intervals->add_option("--scope", scope, "marginal | conditional")
      ->capture_default_str()
      ->check(CLI::IsMember({"marginal", "conditional"}));
  intervals->add_option("--scale", scale, "original | standardized")
      ->capture_default_str()
      ->check(CLI::IsMember({"original", "standardized"}));
  intervals->add_option("--edge", edge_text, "Single coefficient j>i (default: all)");
  intervals->add_option("--out", out_path, "CSV output (default stdout)");

  std::string motif_edges, motif_nodes;
  bool exact_induced = false;
  auto* motif = app.add_subcommand("motif", "Posterior probability of a network motif");
  motif->add_option("trace", trace_path, "Trace file")->required()->check(CLI::ExistingFile);
  motif->add_option("--edges", motif_edges, "Required edges, e.g. \"1>2,2>3\"")->required();
  motif->add_option("--nodes", motif_nodes, "Node set for --exact-induced (default: edge endpoints)");
  motif->add_flag("--exact-induced", exact_induced, "Require the induced subgraph to match exactly");

  auto* edge_probs = app.add_subcommand("edge-probs", "Posterior edge inclusion probabilities");
  edge_probs->add_option("trace", trace_path, "Trace file")->required()->check(CLI::ExistingFile);
  edge_probs->add_option("--out", out_path, "CSV output (default stdout)");

  std::string graph_path, coeffs_path, noise_spec = "bimodal";
  int n = 1000;
  std::uint64_t sim_seed = 1;
  auto* simulate = app.add_subcommand("simulate", "Draw data from a linear SEM");
  simulate->add_option("--graph", graph_path, "Adjacency file")->required()->check(CLI::ExistingFile);
  simulate->add_option("--coeffs", coeffs_path, "p x p CSV; entry (i, j) is the effect of j on i")
      ->required()
      ->check(CLI::ExistingFile);
  simulate->add_option("--noise", noise_spec, "gaussian | bimodal | w,m,v|w,m,v[;...per node]")
      ->capture_default_str();
  simulate->add_option("--n", n, "Observations")->capture_default_str();
  simulate->add_option("--seed", sim_seed, "Random seed")->capture_default_str();
  simulate->add_option("--out", out_path, "CSV output")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: Usage: " << e.what() << '\n';
    return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
  }

  try {
    if (*sample_dag) return run_sampler(dag_args, ModelKind::Dag, out);
    if (*sample_dcg) return run_sampler(dcg_args, ModelKind::Dcg, out);

    if (*simulate) {
      const Graph g = read_adjacency_file(graph_path);
      const auto coeff_data = read_data_csv(coeffs_path, CsvOptions{false});
      if (coeff_data.n() != g.size() || coeff_data.p() != g.size()) {
        fail(ErrorCode::DimensionMismatch, fmt::format("coefficient matrix is {}x{}, graph has {} nodes", coeff_data.n(), coeff_data.p(), g.size()));
      }
      const WeightedSem sem{g, coeff_data.values};
      const auto sim = simulate_sem(sem, parse_noise(noise_spec, g.size()), n, sim_seed);
      if (sim.unstable) err << "warning: spectral radius of B is at least 1; the system has no stable equilibrium\n";
      with_output(out_path, out, [&](std::ostream& o) { write_data_csv(o, sim.data); });
      return 0;
    }

    const Trace trace = read_trace(trace_path);
    if (*point) {
      const auto d = parse_metric(metric, trace);
      const auto est = point_est_graph(trace, d, summary_workers());
      for (const auto& w : est.warnings) err << "warning: " << w << '\n';
      write_medoid_report(out, est);
      if (!out_path.empty()) {
        std::ofstream f(out_path);
        if (!f) fail(ErrorCode::IoError, fmt::format("cannot write {}", out_path));
        write_adjacency(f, est.graph);
      }
      return 0;
    }
    if (*edge_probs) {
      with_output(out_path, out, [&](std::ostream& o) { write_edge_probs_csv(o, edge_inclusion_probs(trace), trace.meta.names); });
      return 0;
    }
    if (*motif) {
      MotifSpec m = make_motif(parse_edges(motif_edges, trace.meta.p),
                               exact_induced ? MotifMode::ExactInduced : MotifMode::AllPresent);
      if (!motif_nodes.empty()) {
        m.node_set = parse_nodes(motif_nodes, trace.meta.p);
        validate_motif(m);
      }
      out << fmt::format("{:.17g}\n", motif_probability(trace, m));
      return 0;
    }
    if (*intervals) {
      const auto how = method == "hpd" ? IntervalMethod::Hpd : IntervalMethod::EqualTailed;
      const auto where = scope == "marginal" ? IntervalScope::Marginal : IntervalScope::ConditionalOnInclusion;
      const bool original = scale == "original";
      std::vector<Edge> targets;
      const bool single = !edge_text.empty();
      if (single) {
        targets = parse_edges(edge_text, trace.meta.p);
      } else {
        for (int i = 0; i < trace.meta.p; ++i) {
          for (int j = 0; j < trace.meta.p; ++j) {
            if (i != j) targets.push_back({j, i});
          }
        }
      }
      with_output(out_path, out, [&](std::ostream& o) {
        write_interval_header(o);
        for (const auto& e : targets) {
          const auto draws = coefficient_draws(trace, e.target, e.source, original);
          if (!single && where == IntervalScope::ConditionalOnInclusion &&
              std::find(draws.included.begin(), draws.included.end(), 1) == draws.included.end()) {
            continue;
          }
          write_interval_row(o, e.target, e.source, posterior_interval(draws.values, level, how, where, draws.included));
        }
      });
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: Internal: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace lingbayes::cli
