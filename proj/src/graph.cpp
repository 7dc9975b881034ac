#include "atebench/graph.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "atebench/errors.hpp"
#include "atebench/random.hpp"

namespace atebench {

NodeSet to_node_set(NodeMask mask) {
    NodeSet out;
    while (mask) {
        out.push_back(std::countr_zero(mask));
        mask &= mask - 1;
    }
    return out;
}

NodeMask to_mask(const NodeSet& nodes) {
    NodeMask m = 0;
    for (int v : nodes) m |= bit(v);
    return m;
}

// ---------------------------------------------------------------------------
// NodeLabels

NodeLabels::NodeLabels(std::vector<std::string> names) {
    if (names.empty()) throw StructuralError("graph needs at least one node");
    if (names.size() > static_cast<std::size_t>(kMaxNodes))
        throw StructuralError("graphs are limited to " + std::to_string(kMaxNodes) + " nodes");
    std::set<std::string> seen;
    for (const auto& n : names) {
        if (n.empty()) throw StructuralError("empty node label");
        if (!seen.insert(n).second) throw StructuralError("duplicate node label '" + n + "'");
    }
    names_ = std::make_shared<const std::vector<std::string>>(std::move(names));
}

NodeLabels NodeLabels::numbered(int d, const std::string& prefix) {
    std::vector<std::string> names;
    names.reserve(d);
    for (int i = 0; i < d; ++i) names.push_back(prefix + std::to_string(i));
    return NodeLabels(std::move(names));
}

const std::vector<std::string>& NodeLabels::names() const {
    static const std::vector<std::string> none;
    return names_ ? *names_ : none;
}

int NodeLabels::index_of(const std::string& name) const {
    const auto& v = names();
    auto it = std::find(v.begin(), v.end(), name);
    return it == v.end() ? -1 : static_cast<int>(it - v.begin());
}

bool operator==(const NodeLabels& a, const NodeLabels& b) {
    if (a.names_ == b.names_) return true;
    return a.names() == b.names();
}

// ---------------------------------------------------------------------------
// BoolMatrix

BoolMatrix::BoolMatrix(int d) {
    if (d < 0 || d > kMaxNodes) throw StructuralError("matrix dimension out of range");
    rows_.assign(d, 0);
}

BoolMatrix BoolMatrix::from_rows(const std::vector<std::vector<int>>& rows) {
    const int d = static_cast<int>(rows.size());
    BoolMatrix m(d);
    for (int i = 0; i < d; ++i) {
        if (static_cast<int>(rows[i].size()) != d) throw StructuralError("adjacency matrix is not square");
        for (int j = 0; j < d; ++j) m.set(i, j, rows[i][j] != 0);
    }
    return m;
}

void BoolMatrix::set(int i, int j, bool value) {
    if (value)
        rows_[i] |= bit(j);
    else
        rows_[i] &= ~bit(j);
}

BoolMatrix BoolMatrix::transposed() const {
    BoolMatrix t(size());
    for (int i = 0; i < size(); ++i)
        for (int j : to_node_set(rows_[i])) t.rows_[j] |= bit(i);
    return t;
}

int BoolMatrix::count() const {
    int c = 0;
    for (auto r : rows_) c += std::popcount(r);
    return c;
}

std::strong_ordering lexicographic_compare(const BoolMatrix& a, const BoolMatrix& b) {
    const int n = std::min(a.size(), b.size());
    for (int i = 0; i < n; ++i) {
        NodeMask diff = a.row(i) ^ b.row(i);
        if (diff) {
            int col = std::countr_zero(diff);
            return a(i, col) ? std::strong_ordering::greater : std::strong_ordering::less;
        }
    }
    return a.size() <=> b.size();
}

std::optional<std::vector<int>> topological_order(const BoolMatrix& adjacency) {
    const int d = adjacency.size();
    std::vector<int> indegree(d, 0);
    for (int i = 0; i < d; ++i)
        for (int j : to_node_set(adjacency.row(i))) ++indegree[j];
    std::vector<int> order;
    order.reserve(d);
    // Lowest index first among ready nodes.
    std::set<int> ready;
    for (int i = 0; i < d; ++i)
        if (indegree[i] == 0) ready.insert(i);
    while (!ready.empty()) {
        int v = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(v);
        for (int j : to_node_set(adjacency.row(v)))
            if (--indegree[j] == 0) ready.insert(j);
    }
    if (static_cast<int>(order.size()) != d) return std::nullopt;
    return order;
}

bool is_acyclic(const BoolMatrix& adjacency) {
    for (int i = 0; i < adjacency.size(); ++i)
        if (adjacency(i, i)) return false;
    return topological_order(adjacency).has_value();
}

// ---------------------------------------------------------------------------
// Dag / Cpdag

Dag::Dag(NodeLabels labels, BoolMatrix adjacency) : labels_(std::move(labels)), adjacency_(std::move(adjacency)) {
    if (labels_.size() != adjacency_.size())
        throw StructuralError("label count does not match adjacency dimension");
    if (adjacency_.size() < 1) throw StructuralError("graph needs at least one node");
    for (int i = 0; i < size(); ++i)
        if (adjacency_(i, i)) throw StructuralError("self-loop on '" + labels_[i] + "'");
    if (!is_acyclic(adjacency_)) throw StructuralError("graph contains a directed cycle");
}

Dag Dag::empty(NodeLabels labels) {
    const int d = labels.size();
    return Dag(std::move(labels), BoolMatrix(d));
}

NodeMask Dag::parents_mask(int node) const {
    NodeMask m = 0;
    for (int i = 0; i < size(); ++i)
        if (adjacency_(i, node)) m |= bit(i);
    return m;
}

Cpdag::Cpdag(NodeLabels labels, BoolMatrix directed, BoolMatrix undirected)
    : labels_(std::move(labels)), directed_(std::move(directed)), undirected_(std::move(undirected)) {
    const int d = labels_.size();
    if (directed_.size() != d || undirected_.size() != d)
        throw StructuralError("label count does not match adjacency dimension");
    for (int i = 0; i < d; ++i) {
        if (directed_(i, i) || undirected_(i, i)) throw StructuralError("self-loop on '" + labels_[i] + "'");
        for (int j = 0; j < d; ++j) {
            if (undirected_(i, j) != undirected_(j, i))
                throw StructuralError("undirected edge set is not symmetric");
            if (undirected_(i, j) && (directed_(i, j) || directed_(j, i)))
                throw StructuralError("edge " + labels_[i] + "-" + labels_[j] + " is both directed and undirected");
            if (directed_(i, j) && directed_(j, i))
                throw StructuralError("edge " + labels_[i] + "-" + labels_[j] + " is directed both ways");
        }
    }
    if (!is_acyclic(directed_)) throw StructuralError("directed part contains a cycle");
}

Cpdag Cpdag::from_dag(const Dag& g) {
    return Cpdag(g.labels(), g.adjacency(), BoolMatrix(g.size()));
}

Cpdag Cpdag::skeleton_of(const Dag& g) {
    return Cpdag(g.labels(), BoolMatrix(g.size()), skeleton(g));
}

// ---------------------------------------------------------------------------
// Queries

namespace {

void check_index(const Dag& g, int node) {
    if (node < 0 || node >= g.size()) throw StructuralError("node index " + std::to_string(node) + " out of range");
}

}  // namespace

NodeSet parents(const Dag& g, int node) {
    check_index(g, node);
    return to_node_set(g.parents_mask(node));
}

NodeSet children(const Dag& g, int node) {
    check_index(g, node);
    return to_node_set(g.children_mask(node));
}

BoolMatrix reachability(const Dag& g) {
    const int d = g.size();
    BoolMatrix reach(d);
    auto order = topological_order(g.adjacency());
    // Reverse topological order: children are complete before their parents.
    for (auto it = order->rbegin(); it != order->rend(); ++it) {
        int v = *it;
        NodeMask m = g.children_mask(v);
        for (int c : to_node_set(g.children_mask(v))) m |= reach.row(c);
        reach.set_row(v, m);
    }
    return reach;
}

NodeMask descendants_mask(const Dag& g, int node) {
    check_index(g, node);
    NodeMask seen = 0;
    NodeMask frontier = g.children_mask(node);
    while (frontier) {
        int v = std::countr_zero(frontier);
        frontier &= frontier - 1;
        if (seen & bit(v)) continue;
        seen |= bit(v);
        frontier |= g.children_mask(v) & ~seen;
    }
    return seen;
}

BoolMatrix skeleton(const Dag& g) {
    BoolMatrix s(g.size());
    const auto t = g.adjacency().transposed();
    for (int i = 0; i < g.size(); ++i) s.set_row(i, g.adjacency().row(i) | t.row(i));
    return s;
}

BoolMatrix skeleton(const Cpdag& p) {
    BoolMatrix s(p.size());
    const auto t = p.directed().transposed();
    for (int i = 0; i < p.size(); ++i) s.set_row(i, p.directed().row(i) | t.row(i) | p.undirected().row(i));
    return s;
}

namespace {

std::vector<VStructure> colliders(const BoolMatrix& directed, const BoolMatrix& adjacency) {
    std::vector<VStructure> out;
    const int d = directed.size();
    const auto in = directed.transposed();
    for (int k = 0; k < d; ++k) {
        NodeSet pa = to_node_set(in.row(k));
        for (std::size_t a = 0; a < pa.size(); ++a)
            for (std::size_t b = a + 1; b < pa.size(); ++b)
                if (!adjacency(pa[a], pa[b])) out.push_back({pa[a], k, pa[b]});
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

std::vector<VStructure> v_structures(const Dag& g) { return colliders(g.adjacency(), skeleton(g)); }

std::vector<VStructure> v_structures(const Cpdag& p) { return colliders(p.directed(), skeleton(p)); }

// ---------------------------------------------------------------------------
// Meek rules

namespace {

bool reaches(const std::vector<NodeMask>& out, int from, int to) {
    NodeMask seen = bit(from);
    NodeMask frontier = out[from];
    while (frontier) {
        int v = std::countr_zero(frontier);
        frontier &= frontier - 1;
        if (v == to) return true;
        if (seen & bit(v)) continue;
        seen |= bit(v);
        frontier |= out[v] & ~seen;
    }
    return false;
}

}  // namespace

MeekResult apply_meek_rules(const Cpdag& p, MeekConflictPolicy policy) {
    const int d = p.size();
    std::vector<NodeMask> out(d), und(d), adj(d), in(d);
    for (int i = 0; i < d; ++i) {
        out[i] = p.directed().row(i);
        und[i] = p.undirected().row(i);
    }
    std::set<std::pair<int, int>> conflicts;

    for (;;) {
        for (int i = 0; i < d; ++i) in[i] = 0;
        for (int i = 0; i < d; ++i)
            for (int j : to_node_set(out[i])) in[j] |= bit(i);
        for (int i = 0; i < d; ++i) adj[i] = out[i] | in[i] | und[i];

        // forced[a] has bit b when some rule orients a -> b.
        std::vector<NodeMask> forced(d, 0);
        for (int a = 0; a < d; ++a) {
            for (int b : to_node_set(und[a])) {
                const NodeMask not_b_adj = ~adj[b] & ~bit(b);
                // R1: c -> a - b, c and b nonadjacent.
                bool fire = (in[a] & not_b_adj) != 0;
                // R2: a -> c -> b.
                if (!fire) fire = (out[a] & in[b]) != 0;
                // R3: a - c -> b, a - e -> b, c and e nonadjacent.
                if (!fire) {
                    const NodeMask cands = und[a] & in[b];
                    for (int c : to_node_set(cands))
                        if (cands & ~adj[c] & ~bit(c)) {
                            fire = true;
                            break;
                        }
                }
                // R4: c -> e -> b with a adjacent to both c and e, c and b nonadjacent.
                if (!fire) {
                    for (int e : to_node_set(adj[a] & in[b]))
                        if (in[e] & adj[a] & not_b_adj) {
                            fire = true;
                            break;
                        }
                }
                if (fire) forced[a] |= bit(b);
            }
        }

        bool changed = false;
        for (int a = 0; a < d; ++a) {
            for (int b : to_node_set(forced[a])) {
                if (forced[b] & bit(a)) {
                    if (policy == MeekConflictPolicy::raise)
                        throw InconsistencyError("Meek rules orient " + p.labels()[a] + "-" + p.labels()[b] +
                                                 " in both directions");
                    conflicts.insert({std::min(a, b), std::max(a, b)});
                    continue;
                }
                if (reaches(out, b, a)) {
                    if (policy == MeekConflictPolicy::raise)
                        throw InconsistencyError("orienting " + p.labels()[a] + "->" + p.labels()[b] +
                                                 " would close a directed cycle");
                    conflicts.insert({std::min(a, b), std::max(a, b)});
                    continue;
                }
                out[a] |= bit(b);
                und[a] &= ~bit(b);
                und[b] &= ~bit(a);
                changed = true;
            }
        }
        if (!changed) break;
    }

    BoolMatrix directed(d), undirected(d);
    for (int i = 0; i < d; ++i) {
        directed.set_row(i, out[i]);
        undirected.set_row(i, und[i]);
    }
    return MeekResult{Cpdag(p.labels(), std::move(directed), std::move(undirected)),
                      {conflicts.begin(), conflicts.end()}};
}

Cpdag apply_meek_rules(const Cpdag& p) { return apply_meek_rules(p, MeekConflictPolicy::raise).graph; }

// ---------------------------------------------------------------------------
// Consistent extension

Dag consistent_extension(const Cpdag& p, std::uint64_t seed) {
    const int d = p.size();
    std::vector<NodeMask> out(d), und(d), adj(d);
    const auto sk = skeleton(p);
    for (int i = 0; i < d; ++i) {
        out[i] = p.directed().row(i);
        und[i] = p.undirected().row(i);
        adj[i] = sk.row(i);
    }
    std::vector<int> order(d);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(splitmix64(seed));
    std::shuffle(order.begin(), order.end(), rng);

    BoolMatrix result = p.directed();
    NodeMask remaining = d == kMaxNodes ? ~NodeMask{0} : bit(d) - 1;
    for (int step = 0; step < d; ++step) {
        int sink = -1;
        for (int x : order) {
            if (!(remaining & bit(x))) continue;
            if (out[x] & remaining) continue;
            const NodeMask adj_x = adj[x] & remaining;
            bool ok = true;
            for (int y : to_node_set(und[x] & remaining)) {
                const NodeMask others = adj_x & ~bit(y);
                if ((others & ~adj[y]) != 0) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                sink = x;
                break;
            }
        }
        if (sink < 0) throw ExtensionError("partially directed graph admits no consistent extension");
        for (int y : to_node_set(und[sink] & remaining)) result.set(y, sink);
        remaining &= ~bit(sink);
    }
    return Dag(p.labels(), std::move(result));
}

}  // namespace atebench
