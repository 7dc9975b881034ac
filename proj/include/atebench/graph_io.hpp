#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "atebench/graph.hpp"

namespace atebench {

// Plain-text edge list:
//
//   nodes: A,B,C
//   A -> B
//   B -- C        (undirected, CPDAG files only)
//
// Blank lines and lines starting with '#' are ignored. A file may hold several
// graphs; each `nodes:` line starts a new one, optionally followed by
// `weight: <w>`.
struct EdgeListGraph {
    NodeLabels labels;
    std::vector<std::pair<int, int>> directed;
    std::vector<std::pair<int, int>> undirected;
    std::optional<double> weight;
};

std::vector<EdgeListGraph> parse_edge_lists(std::istream& in, const std::string& source);
EdgeListGraph parse_edge_list(std::istream& in, const std::string& source);

// Throw ValidationError naming `source` on cycles or undirected edges.
Dag to_dag(const EdgeListGraph& g, const std::string& source);
Cpdag to_cpdag(const EdgeListGraph& g, const std::string& source);

Dag read_dag(const std::filesystem::path& path);
Cpdag read_cpdag(const std::filesystem::path& path);

std::string format_edge_list(const Dag& g);
std::string format_edge_list(const Cpdag& p);

void write_dag(const std::filesystem::path& path, const Dag& g);

}  // namespace atebench
