#include <vector>

#include <benchmark/benchmark.h>

#include "lingbayes/chain.hpp"
#include "lingbayes/likelihood.hpp"
#include "lingbayes/sampler_dag.hpp"
#include "lingbayes/summary.hpp"

using namespace lingbayes;

namespace {

Graph random_dag(int p, Rng& rng) {
  Graph g(p);
  for (int a = 0; a < p; ++a)
    for (int b = a + 1; b < p; ++b)
      if (rng.uniform() < 0.4) g.set(b, a, true);
  return g;
}

DataMatrix chain_data(int p, int n) {
  WeightedSem sem{Graph(p), Eigen::MatrixXd::Zero(p, p)};
  for (int i = 1; i < p; ++i) {
    sem.graph.set(i, i - 1, true);
    sem.B(i, i - 1) = i % 2 ? 0.8 : -0.6;
  }
  NoiseModel noise{std::vector<GaussianMixture>(p, GaussianMixture{{0.5, 0.5}, {-1.0, 1.0}, {0.2, 0.2}})};
  auto data = simulate_sem(sem, noise, n, 1).data;
  standardize(data);
  return data;
}

void BM_CollapsedMarginal(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(1);
  Eigen::MatrixXd X(n, 3);
  std::vector<double> y(n), v(n, 1.0);
  for (int q = 0; q < n; ++q) {
    for (int j = 0; j < 3; ++j) X(q, j) = rng.normal();
    y[q] = rng.normal();
  }
  const auto stats = node_suff_stats(y, X, v);
  const std::vector<int> parents{0, 2};
  for (auto _ : state) benchmark::DoNotOptimize(collapsed_log_marginal(stats, parents, 1.0));
}
BENCHMARK(BM_CollapsedMarginal)->Arg(300)->Arg(3000);

void BM_SuffStats(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(2);
  Eigen::MatrixXd X = Eigen::MatrixXd::NullaryExpr(n, 5, [&]() { return rng.normal(); });
  std::vector<double> y(n, 0.5), v(n, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(node_suff_stats(y, X, v));
}
BENCHMARK(BM_SuffStats)->Arg(300)->Arg(3000);

void BM_CyclicLogLikelihood(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const auto data = chain_data(p, 1000);
  WeightedSem sem{Graph(p), Eigen::MatrixXd::Zero(p, p)};
  for (int i = 0; i < p; ++i) {
    sem.graph.set(i, (i + 1) % p, true);
    sem.B(i, (i + 1) % p) = 0.3;
  }
  const NoiseModel noise{std::vector<GaussianMixture>(p, GaussianMixture{{0.5, 0.5}, {-1.0, 1.0}, {0.2, 0.2}})};
  for (auto _ : state) benchmark::DoNotOptimize(cyclic_log_likelihood(data.values, sem, noise));
}
BENCHMARK(BM_CyclicLogLikelihood)->Arg(3)->Arg(8);

void BM_DagSweeps(benchmark::State& state) {
  const auto data = chain_data(static_cast<int>(state.range(0)), 500);
  ChainConfig cfg;
  cfg.iterations = 100;
  cfg.burn_in = 50;
  cfg.thin = 1;
  for (auto _ : state) benchmark::DoNotOptimize(run_dag_chain(data, cfg));
  state.SetItemsProcessed(state.iterations() * cfg.iterations);
}
BENCHMARK(BM_DagSweeps)->Arg(3)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_Sid(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  Rng rng(3);
  const Graph a = random_dag(p, rng), b = random_dag(p, rng);
  for (auto _ : state) benchmark::DoNotOptimize(sid(a, b));
}
BENCHMARK(BM_Sid)->Arg(5)->Arg(10)->Arg(20);

void BM_Medoid(benchmark::State& state) {
  Rng rng(4);
  std::vector<Graph> graphs;
  for (int k = 0; k < state.range(0); ++k) graphs.push_back(random_dag(6, rng));
  const GraphDistance d{DistanceKind::ShdStandard, {}};
  for (auto _ : state) benchmark::DoNotOptimize(point_est_graph(std::span<const Graph>(graphs), d));
}
BENCHMARK(BM_Medoid)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
