#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "lingbayes/chain.hpp"
#include "lingbayes/data.hpp"

namespace lingbayes {

// Gibbs-within-Metropolis sampler over directed graphs that may contain
// cycles. Edges and coefficients move by Metropolis-Hastings under the
// Jacobian-corrected likelihood; mixture labels, mixture parameters, gamma
// and gamma1 are Gibbs-updated.
Trace run_dcg_chain(const DataMatrix& data, const ChainConfig& cfg, const SamplerControls& controls = {},
                    std::uint64_t stream = 0);

struct MoveContext {
  double temperature = 1.0;
  double mh_step = 0.1;
  bool forbid_cycles = false;
};

// Toggles edge j -> i. A birth draws the new coefficient from the slab
// N(0, gamma1), so the acceptance ratio reduces to the tempered likelihood
// ratio times gamma/(1-gamma) (inverted for a death). Returns whether the
// move was accepted; a rejected move leaves `state` untouched.
bool mh_edge_toggle(ChainState& state, int i, int j, const Eigen::MatrixXd& Y, const MoveContext& ctx, Rng& rng);

// Random-walk update of the coefficient on the existing edge j -> i.
bool mh_coefficient_update(ChainState& state, int i, int j, const Eigen::MatrixXd& Y, const MoveContext& ctx,
                           Rng& rng);

}  // namespace lingbayes
