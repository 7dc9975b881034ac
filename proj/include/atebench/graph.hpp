#pragma once

#include <bit>
#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace atebench {

// Graphs are dense and bit-packed: one 64-bit word per row.
inline constexpr int kMaxNodes = 64;

using NodeSet = std::vector<int>;  // sorted, unique
using NodeMask = std::uint64_t;

inline constexpr NodeMask bit(int i) { return NodeMask{1} << i; }

NodeSet to_node_set(NodeMask mask);
NodeMask to_mask(const NodeSet& nodes);

// Shared, immutable list of unique variable names.
class NodeLabels {
public:
    NodeLabels() = default;
    explicit NodeLabels(std::vector<std::string> names);

    static NodeLabels numbered(int d, const std::string& prefix = "X");

    int size() const { return names_ ? static_cast<int>(names_->size()) : 0; }
    const std::string& operator[](int i) const { return (*names_)[i]; }
    const std::vector<std::string>& names() const;
    // -1 when absent.
    int index_of(const std::string& name) const;

    friend bool operator==(const NodeLabels& a, const NodeLabels& b);

private:
    std::shared_ptr<const std::vector<std::string>> names_;
};

// Square boolean matrix; entry (i, j) is bit j of row i.
class BoolMatrix {
public:
    BoolMatrix() = default;
    explicit BoolMatrix(int d);

    // Throws StructuralError for ragged or non-square input.
    static BoolMatrix from_rows(const std::vector<std::vector<int>>& rows);

    int size() const { return static_cast<int>(rows_.size()); }
    bool operator()(int i, int j) const { return (rows_[i] >> j) & 1U; }
    void set(int i, int j, bool value = true);
    NodeMask row(int i) const { return rows_[i]; }
    void set_row(int i, NodeMask mask) { rows_[i] = mask; }
    const std::vector<NodeMask>& rows() const { return rows_; }

    BoolMatrix transposed() const;
    int count() const;

    friend bool operator==(const BoolMatrix&, const BoolMatrix&) = default;

private:
    std::vector<NodeMask> rows_;
};

// Lexicographic order on row-major adjacency bits (0 < 1, column 0 first).
std::strong_ordering lexicographic_compare(const BoolMatrix& a, const BoolMatrix& b);

bool is_acyclic(const BoolMatrix& adjacency);
std::optional<std::vector<int>> topological_order(const BoolMatrix& adjacency);

class Dag {
public:
    Dag() = default;
    // Validates labels/size agreement, self-loops and acyclicity.
    Dag(NodeLabels labels, BoolMatrix adjacency);

    static Dag empty(NodeLabels labels);

    int size() const { return adjacency_.size(); }
    const NodeLabels& labels() const { return labels_; }
    const BoolMatrix& adjacency() const { return adjacency_; }
    bool has_edge(int from, int to) const { return adjacency_(from, to); }
    bool adjacent(int a, int b) const { return adjacency_(a, b) || adjacency_(b, a); }
    int num_edges() const { return adjacency_.count(); }

    NodeMask children_mask(int node) const { return adjacency_.row(node); }
    NodeMask parents_mask(int node) const;

    friend bool operator==(const Dag& a, const Dag& b) {
        return a.labels_ == b.labels_ && a.adjacency_ == b.adjacency_;
    }

private:
    NodeLabels labels_;
    BoolMatrix adjacency_;
};

class Cpdag {
public:
    Cpdag() = default;
    // Checks disjointness, symmetry of `undirected`, self-loops and that the
    // directed part is acyclic.
    Cpdag(NodeLabels labels, BoolMatrix directed, BoolMatrix undirected);

    static Cpdag from_dag(const Dag& g);  // all edges directed
    static Cpdag skeleton_of(const Dag& g);  // all edges undirected

    int size() const { return directed_.size(); }
    const NodeLabels& labels() const { return labels_; }
    const BoolMatrix& directed() const { return directed_; }
    const BoolMatrix& undirected() const { return undirected_; }
    bool has_directed(int from, int to) const { return directed_(from, to); }
    bool has_undirected(int a, int b) const { return undirected_(a, b); }
    bool adjacent(int a, int b) const {
        return directed_(a, b) || directed_(b, a) || undirected_(a, b);
    }
    int num_undirected() const { return undirected_.count() / 2; }

    friend bool operator==(const Cpdag& a, const Cpdag& b) {
        return a.labels_ == b.labels_ && a.directed_ == b.directed_ && a.undirected_ == b.undirected_;
    }

private:
    NodeLabels labels_;
    BoolMatrix directed_;
    BoolMatrix undirected_;
};

NodeSet parents(const Dag& g, int node);
NodeSet children(const Dag& g, int node);

// reach.row(i) holds every node reachable from i by a directed path of length >= 1.
BoolMatrix reachability(const Dag& g);
NodeMask descendants_mask(const Dag& g, int node);

// Symmetric adjacency ignoring direction.
BoolMatrix skeleton(const Dag& g);
BoolMatrix skeleton(const Cpdag& p);

struct VStructure {
    int i;
    int k;  // collider
    int j;

    friend auto operator<=>(const VStructure&, const VStructure&) = default;
};

// Triples i -> k <- j with i < j and i, j nonadjacent, sorted.
std::vector<VStructure> v_structures(const Dag& g);
// Same, using only the directed edges of a partially directed graph.
std::vector<VStructure> v_structures(const Cpdag& p);

enum class MeekConflictPolicy { raise, leave_undirected };

struct MeekResult {
    Cpdag graph;
    // Undirected edges (a < b) that the rules wanted oriented both ways.
    std::vector<std::pair<int, int>> conflicts;
};

// Closure under Meek rules R1-R4. Throws InconsistencyError on a conflict.
Cpdag apply_meek_rules(const Cpdag& p);
MeekResult apply_meek_rules(const Cpdag& p, MeekConflictPolicy policy);

// Dor-Tarsi sink elimination. Candidate sinks are scanned in a seeded random
// order and the first admissible one is removed; the same (p, seed) always
// yields the same DAG. Throws ExtensionError when no extension exists.
Dag consistent_extension(const Cpdag& p, std::uint64_t seed = 0);

}  // namespace atebench
