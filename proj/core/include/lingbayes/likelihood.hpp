#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lingbayes/data.hpp"
#include "lingbayes/graph.hpp"
#include "lingbayes/noise.hpp"
#include "lingbayes/rng.hpp"

namespace lingbayes {

// Graph plus coefficients: B(i, j) is the direct effect of j on i and is zero
// wherever the graph has no edge j -> i.
struct WeightedSem {
  Graph graph;
  Eigen::MatrixXd B;

  void validate() const;
};

inline constexpr double kDeterminantGuard = 1e-10;

// Log marginal likelihood of one node's regression with the coefficients
// integrated out:
//   log ∫ prod_q N(y_q; x_q'b, v_q) prod_j N(b_j; 0, gamma1) db.
// `y` must already have the assigned component means subtracted and `v`
// holds the per-observation variances of the assigned components.
double collapsed_node_log_marginal(std::span<const double> y, const Eigen::MatrixXd& X,
                                   std::span<const double> obs_variances, double gamma1);

// Weighted sufficient statistics of one node's regression against every
// column of the data, so the collapsed marginal for any parent subset costs
// O(k^3) instead of O(n k^2).
struct NodeSuffStats {
  Eigen::MatrixXd gram;   // X' W X over all candidate columns
  Eigen::VectorXd cross;  // X' W y
  double yy = 0.0;        // y' W y
  double sum_log_v = 0.0;
  int n = 0;
};

NodeSuffStats node_suff_stats(std::span<const double> y, const Eigen::MatrixXd& X,
                              std::span<const double> obs_variances);

double collapsed_log_marginal(const NodeSuffStats& stats, std::span<const int> parents, double gamma1);

// Exact Gaussian full conditional of the coefficients on `parents`.
Eigen::VectorXd draw_coefficients(const NodeSuffStats& stats, std::span<const int> parents, double gamma1,
                                  Rng& rng);

// Jacobian-corrected log likelihood of a possibly cyclic SEM:
//   n log|det(I - B)| + sum_q sum_i log p_i(((I - B) y_q)_i).
// Throws SingularSystem when |det(I - B)| <= 1e-10.
double cyclic_log_likelihood(const Eigen::MatrixXd& Y, const WeightedSem& sem, const NoiseModel& noise);

// log|det(I - B)|, or SingularSystem past the guard.
double log_abs_det_i_minus_b(const Eigen::MatrixXd& B);

struct SimulatedData {
  DataMatrix data;
  // Set for cyclic systems whose coefficient matrix has spectral radius >= 1.
  bool unstable = false;
};

SimulatedData simulate_sem(const WeightedSem& sem, const NoiseModel& noise, int n, std::uint64_t seed);

}  // namespace lingbayes
