#include "lingbayes/summary.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <thread>

#include <fmt/format.h>

#include "lingbayes/error.hpp"

namespace lingbayes {

UniqueGraphSet unique_graphs(std::span<const Graph> graphs) {
  if (graphs.empty()) fail(ErrorCode::EmptyTrace, "no graphs to summarize");
  std::map<std::string, std::pair<const Graph*, int>> groups;
  for (const auto& g : graphs) {
    auto [it, inserted] = groups.try_emplace(canonical_key(g), &g, 0);
    ++it->second.second;
  }
  UniqueGraphSet set;
  set.total = static_cast<int>(graphs.size());
  for (const auto& [key, entry] : groups) {
    set.keys.push_back(key);
    set.graphs.push_back(*entry.first);
    set.counts.push_back(entry.second);
    set.weights.push_back(static_cast<double>(entry.second) / set.total);
  }
  return set;
}

std::vector<Graph> trace_graphs(const Trace& trace) {
  std::vector<Graph> out;
  out.reserve(trace.samples.size());
  for (const auto& s : trace.samples) out.push_back(s.graph);
  return out;
}

Eigen::MatrixXd edge_inclusion_probs(const Trace& trace) {
  if (trace.samples.empty()) fail(ErrorCode::EmptyTrace, "trace has no samples");
  const int p = trace.samples.front().graph.size();
  Eigen::MatrixXd probs = Eigen::MatrixXd::Zero(p, p);
  for (const auto& s : trace.samples) {
    for (const auto& e : s.graph.edges()) probs(e.target, e.source) += 1.0;
  }
  return probs / static_cast<double>(trace.samples.size());
}

PointEstimate point_est_graph(const Trace& trace, const GraphDistance& d, int workers) {
  const auto graphs = trace_graphs(trace);
  return point_est_graph(graphs, d, workers);
}

PointEstimate point_est_graph(std::span<const Graph> graphs, const GraphDistance& d, int workers) {
  if (graphs.empty()) fail(ErrorCode::EmptyTrace, "trace has no samples");
  if (d.kind == DistanceKind::Sid) {
    for (const auto& g : graphs) {
      if (!is_acyclic(g)) fail(ErrorCode::SidOnCyclic, "SID is only applicable to DAGs");
    }
  }
  const auto set = unique_graphs(graphs);
  const auto v = set.graphs.size();

  // Row l of the table holds d(G_l, G_u) for every u.
  std::vector<double> table(v * v, 0.0);
  auto fill_rows = [&](std::size_t first, std::size_t stride) {
    for (std::size_t l = first; l < v; l += stride) {
      for (std::size_t u = 0; u < v; ++u) table[l * v + u] = d(set.graphs[l], set.graphs[u]);
    }
  };
  const auto nworkers = static_cast<std::size_t>(std::clamp(workers, 1, static_cast<int>(std::max<std::size_t>(v, 1))));
  if (nworkers == 1) {
    fill_rows(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < nworkers; ++w) pool.emplace_back(fill_rows, w, nworkers);
    for (auto& t : pool) t.join();
  }

  PointEstimate est;
  // Count-weighted totals are exact for integer distances, so ties compare
  // exactly; D_l is the total divided by m.
  std::size_t best = 0;
  double best_total = 0.0;
  for (std::size_t l = 0; l < v; ++l) {
    double total = 0.0;
    for (std::size_t u = 0; u < v; ++u) total += set.counts[u] * table[l * v + u];
    if (table[l * v + l] != 0.0) {
      est.warnings.push_back(fmt::format("distance of graph '{}' to itself is {}", set.keys[l], table[l * v + l]));
    }
    est.table.push_back({set.keys[l], set.weights[l], total / set.total});
    if (l == 0 || total < best_total) {
      best = l;
      best_total = total;
    }
  }
  est.graph = set.graphs[best];
  est.key = set.keys[best];
  est.expected_loss = best_total / set.total;
  return est;
}

std::string_view to_string(IntervalMethod method) { return method == IntervalMethod::Hpd ? "hpd" : "equal-tailed"; }

std::string_view to_string(IntervalScope scope) {
  return scope == IntervalScope::Marginal ? "marginal" : "conditional";
}

double interpolated_quantile(std::span<const double> sorted, double prob) {
  if (sorted.empty()) fail(ErrorCode::InvalidArgument, "quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

CredibleInterval posterior_interval(std::span<const double> values, double level, IntervalMethod method,
                                    IntervalScope scope, std::span<const std::uint8_t> included) {
  if (!(level > 0.0 && level < 1.0)) fail(ErrorCode::InvalidArgument, fmt::format("level {} outside (0, 1)", level));
  if (values.size() < 2) fail(ErrorCode::InvalidArgument, "need at least two draws for an interval");
  if (!included.empty() && included.size() != values.size()) {
    fail(ErrorCode::DimensionMismatch, "inclusion flags and draws differ in length");
  }
  auto is_included = [&](std::size_t q) { return included.empty() ? values[q] != 0.0 : included[q] != 0; };

  std::vector<double> kept;
  std::size_t n_included = 0;
  for (std::size_t q = 0; q < values.size(); ++q) {
    const bool in = is_included(q);
    n_included += in ? 1 : 0;
    if (scope == IntervalScope::Marginal || in) kept.push_back(values[q]);
  }
  if (kept.empty()) fail(ErrorCode::EmptyConditional, "no draws with the edge present");
  std::sort(kept.begin(), kept.end());

  CredibleInterval ci;
  ci.level = level;
  ci.method = method;
  ci.scope = scope;
  ci.inclusion_prob = static_cast<double>(n_included) / static_cast<double>(values.size());
  if (method == IntervalMethod::EqualTailed) {
    ci.lower = interpolated_quantile(kept, 0.5 * (1.0 - level));
    ci.upper = interpolated_quantile(kept, 0.5 * (1.0 + level));
  } else {
    const std::size_t m = kept.size();
    // The 1e-9 absorbs representation error such as 0.95 * 100 = 95.000000000000014.
    const auto width = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::ceil(level * static_cast<double>(m) - 1e-9)), 1, m);
    std::size_t start = 0;
    double shortest = kept[width - 1] - kept[0];
    for (std::size_t s = 1; s + width <= m; ++s) {
      const double len = kept[s + width - 1] - kept[s];
      if (len < shortest) {
        shortest = len;
        start = s;
      }
    }
    ci.lower = kept[start];
    ci.upper = kept[start + width - 1];
  }
  return ci;
}

CoefficientDraws coefficient_draws(const Trace& trace, int i, int j, bool original_scale) {
  const int p = trace.meta.p;
  if (i < 0 || j < 0 || i >= p || j >= p) fail(ErrorCode::IndexOutOfRange, fmt::format("coefficient ({}, {}) outside 1..{}", i + 1, j + 1, p));
  double factor = 1.0;
  if (original_scale && trace.meta.scale.size() == static_cast<std::size_t>(p)) {
    factor = trace.meta.scale[static_cast<std::size_t>(i)] / trace.meta.scale[static_cast<std::size_t>(j)];
  }
  CoefficientDraws out;
  for (const auto& s : trace.samples) {
    out.values.push_back(factor * s.B(i, j));
    out.included.push_back(s.graph(i, j) ? 1 : 0);
  }
  return out;
}

double motif_probability(const Trace& trace, const MotifSpec& motif) {
  if (trace.samples.empty()) fail(ErrorCode::EmptyTrace, "trace has no samples");
  validate_motif(motif);
  std::size_t hits = 0;
  for (const auto& s : trace.samples) hits += contains_motif(s.graph, motif) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(trace.samples.size());
}

void write_edge_probs_csv(std::ostream& out, const Eigen::MatrixXd& probs, const std::vector<std::string>& names) {
  const auto p = probs.rows();
  out << "target";
  for (Eigen::Index j = 0; j < p; ++j) {
    out << ',' << (static_cast<std::size_t>(j) < names.size() ? names[static_cast<std::size_t>(j)] : fmt::format("x{}", j + 1));
  }
  out << '\n';
  for (Eigen::Index i = 0; i < p; ++i) {
    out << (static_cast<std::size_t>(i) < names.size() ? names[static_cast<std::size_t>(i)] : fmt::format("x{}", i + 1));
    for (Eigen::Index j = 0; j < p; ++j) out << fmt::format(",{}", probs(i, j));
    out << '\n';
  }
}

void write_medoid_report(std::ostream& out, const PointEstimate& est) {
  out << "# canonical_key,weight,expected_loss\n";
  for (const auto& row : est.table) {
    out << fmt::format("\"{}\",{},{}\n", row.key, row.weight, row.expected_loss);
  }
  out << fmt::format("# selected \"{}\" expected_loss={}\n", est.key, est.expected_loss);
  write_adjacency(out, est.graph);
}

void write_interval_header(std::ostream& out) { out << "i,j,lower,upper,level,method,scope,inclusion_prob\n"; }

void write_interval_row(std::ostream& out, int i, int j, const CredibleInterval& ci) {
  out << fmt::format("{},{},{},{},{},{},{},{}\n", i + 1, j + 1, ci.lower, ci.upper, ci.level,
                     to_string(ci.method), to_string(ci.scope), ci.inclusion_prob);
}

}  // namespace lingbayes
