#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lingbayes/chain.hpp"

namespace lingbayes::detail {

ChainState initial_state(const Eigen::MatrixXd& Y, const ChainConfig& cfg, const SamplerControls& controls,
                         Rng& rng);

// Residuals (I - B) y_q for node i, one per observation.
std::vector<double> node_residuals(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& B, int i);

// Step (3): labels then mixture parameters for every node.
void update_noise(ChainState& state, const Eigen::MatrixXd& Y, const MixtureHyper& hyper, Rng& rng);

// Step (4).
void update_hyper(ChainState& state, const ChainConfig& cfg, const SamplerControls& controls, Rng& rng);

bool should_record(int iter, const ChainConfig& cfg);
Sample snapshot(const ChainState& state, int iter);

void report_progress(int iter, const ChainConfig& cfg, const ChainState& state, ModelKind kind);

}  // namespace lingbayes::detail
