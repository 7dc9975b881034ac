#pragma once

#include "atebench/graph.hpp"
#include "atebench/scm.hpp"

namespace atebench {

struct GesResult {
    Cpdag cpdag;
    double score = 0.0;  // BIC of any member of the returned class
    int inserts = 0;
    int deletes = 0;
};

// Greedy equivalence search over CPDAGs with the linear-Gaussian BIC: a forward
// phase applying the best valid Insert(X, Y, T) while it improves the score,
// then a backward phase of Delete(X, Y, H). Needs n >= d + 2.
GesResult ges_search(const Dataset& data);
Cpdag ges(const Dataset& data);

}  // namespace atebench
