#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "atebench/ci_test.hpp"
#include "atebench/graph.hpp"
#include "atebench/scm.hpp"

namespace atebench {

struct PcResult {
    Cpdag cpdag;
    std::size_t ci_tests = 0;
    int max_level = 0;
    // Edges left undirected because collider or Meek orientations disagreed.
    std::vector<std::pair<int, int>> conflicts;
};

// PC-stable: level-wise skeleton search with adjacency sets frozen per level,
// colliders from separating sets, then Meek propagation.
PcResult pc_search(const Dataset& data, const CiTestConfig& cfg);
Cpdag pc(const Dataset& data, const CiTestConfig& cfg);

}  // namespace atebench
