#pragma once

#include <cstdint>

#include "lingbayes/chain.hpp"
#include "lingbayes/data.hpp"

namespace lingbayes {

// Collapsed Gibbs sampler over DAGs with simulated annealing during burn-in.
//
// Each sweep: (1) Gibbs update of every edge indicator from its collapsed
// conditional (coefficients integrated out, cycle-closing additions given
// probability zero), followed by pair moves that reverse, add or delete an
// edge while rescaling the two nodes' noise; (2) a draw of B from its
// Gaussian full conditional; (3) Gibbs updates of mixture labels and
// parameters on the residuals; (4) conjugate updates of gamma and gamma1.
// `data` is used as given; standardize it beforehand for the default priors.
Trace run_dag_chain(const DataMatrix& data, const ChainConfig& cfg, const SamplerControls& controls = {},
                    std::uint64_t stream = 0);

}  // namespace lingbayes
