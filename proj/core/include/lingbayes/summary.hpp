#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lingbayes/chain.hpp"
#include "lingbayes/graph.hpp"

namespace lingbayes {

// Distinct graphs of a sample, ordered by canonical key, with
// weights[u] = counts[u] / m.
struct UniqueGraphSet {
  std::vector<Graph> graphs;
  std::vector<std::string> keys;
  std::vector<int> counts;
  std::vector<double> weights;
  int total = 0;
};

UniqueGraphSet unique_graphs(std::span<const Graph> graphs);
std::vector<Graph> trace_graphs(const Trace& trace);

// p x p matrix whose (i, j) entry is the fraction of samples with j -> i.
Eigen::MatrixXd edge_inclusion_probs(const Trace& trace);

struct MedoidRow {
  std::string key;
  double weight = 0.0;
  double expected_loss = 0.0;  // D_l
};

struct PointEstimate {
  Graph graph;
  std::string key;
  double expected_loss = 0.0;
  std::vector<MedoidRow> table;  // one row per unique graph, key order
  std::vector<std::string> warnings;
};

// Posterior weighted medoid: the sampled graph minimizing
// D_l = sum_u w_u d(G_l, G_u), ties going to the smallest canonical key.
// The distance is evaluated with the candidate as first argument. `workers`
// threads fill the distance table; the result does not depend on it.
PointEstimate point_est_graph(const Trace& trace, const GraphDistance& d, int workers = 1);
PointEstimate point_est_graph(std::span<const Graph> graphs, const GraphDistance& d, int workers = 1);

enum class IntervalMethod { Hpd, EqualTailed };
enum class IntervalScope { Marginal, ConditionalOnInclusion };

std::string_view to_string(IntervalMethod method);
std::string_view to_string(IntervalScope scope);

struct CredibleInterval {
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.0;
  IntervalMethod method = IntervalMethod::Hpd;
  IntervalScope scope = IntervalScope::Marginal;
  double inclusion_prob = 0.0;
};

// `included` flags the samples where the parameter's edge is present; when
// empty, a sample counts as included iff its value is nonzero.
CredibleInterval posterior_interval(std::span<const double> values, double level, IntervalMethod method,
                                    IntervalScope scope, std::span<const std::uint8_t> included = {});

// Empirical quantile with linear interpolation between order statistics
// (position (m - 1) * prob in the sorted sample).
double interpolated_quantile(std::span<const double> sorted, double prob);

struct CoefficientDraws {
  std::vector<double> values;
  std::vector<std::uint8_t> included;
};

// Draws of B(i, j), optionally mapped back to the data's original scale.
CoefficientDraws coefficient_draws(const Trace& trace, int i, int j, bool original_scale = true);

double motif_probability(const Trace& trace, const MotifSpec& motif);

// Report writers.
void write_edge_probs_csv(std::ostream& out, const Eigen::MatrixXd& probs, const std::vector<std::string>& names);
void write_medoid_report(std::ostream& out, const PointEstimate& est);
void write_interval_header(std::ostream& out);
void write_interval_row(std::ostream& out, int i, int j, const CredibleInterval& ci);

}  // namespace lingbayes
