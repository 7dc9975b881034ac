#pragma once

#include <cstdint>

#include "atebench/posterior.hpp"
#include "atebench/scm.hpp"

namespace atebench {

struct McmcConfig {
    long steps = 500000;
    long burn_in = 100000;
    long thin = 400;
    std::uint64_t seed = 0;
};

struct McmcResult {
    PosteriorSample sample;
    long proposals = 0;
    long accepted = 0;
    double final_score = 0.0;
};

// Metropolis-Hastings over DAGs targeting exp(BIC) under a uniform graph prior.
// Proposals pick uniformly among all valid single-edge additions, deletions and
// reversals; the acceptance ratio carries the move-count correction
// |moves(G)| / |moves(G')|. The chain starts from the empty graph and keeps
// every thin-th state after burn_in, i.e. floor((steps - burn_in) / thin) DAGs.
McmcResult structure_mcmc_run(const Dataset& data, const McmcConfig& cfg);
PosteriorSample structure_mcmc(const Dataset& data, long steps, long burn_in, long thin, std::uint64_t seed);

// Number of valid single-edge moves out of g.
long count_moves(const Dag& g);

}  // namespace atebench
