#pragma once

#include <cstddef>
#include <vector>

#include "atebench/graph.hpp"

namespace atebench {

inline constexpr std::size_t kDefaultMecCap = 100000;

// Skeleton of g, its v-structures directed as in g, remaining compelled edges
// oriented by the Meek rules, everything else undirected.
Cpdag cpdag_of(const Dag& g);

struct MecEnumeration {
    Dag source;
    Cpdag cpdag;
    std::vector<Dag> members;  // lexicographic on adjacency bits
    std::size_t cap = kDefaultMecCap;
};

// Every DAG Markov equivalent to g. Undirected edges are oriented both ways in
// turn, each branch reclosed under the Meek rules; branches the rules reject are
// pruned. Throws CapacityError once more than `cap` members are found.
MecEnumeration enumerate_mec(const Dag& g, std::size_t cap = kDefaultMecCap);

}  // namespace atebench
