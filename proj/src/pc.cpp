#include "atebench/pc.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "atebench/errors.hpp"

namespace atebench {

namespace {

// Calls f(subset) for each size-k subset of items in lexicographic order until f returns true.
template <typename F>
bool any_combination(const std::vector<int>& items, int k, F&& f) {
    const int n = static_cast<int>(items.size());
    if (k > n) return false;
    std::vector<int> pos(k);
    for (int i = 0; i < k; ++i) pos[i] = i;
    NodeSet subset(k);
    for (;;) {
        for (int i = 0; i < k; ++i) subset[i] = items[pos[i]];
        if (f(subset)) return true;
        int i = k - 1;
        while (i >= 0 && pos[i] == n - k + i) --i;
        if (i < 0) return false;
        ++pos[i];
        for (int j = i + 1; j < k; ++j) pos[j] = pos[j - 1] + 1;
    }
}

// Drops directed edges on cycles back to undirected until the directed part is acyclic.
void break_cycles(std::vector<NodeMask>& out, std::vector<NodeMask>& und,
                  std::set<std::pair<int, int>>& conflicts) {
    const int d = static_cast<int>(out.size());
    for (;;) {
        BoolMatrix m(d);
        for (int i = 0; i < d; ++i) m.set_row(i, out[i]);
        if (is_acyclic(m)) return;
        // Remove the first directed edge a -> b that lies on a cycle (b reaches a).
        bool removed = false;
        for (int a = 0; a < d && !removed; ++a)
            for (int b : to_node_set(out[a])) {
                NodeMask seen = 0, frontier = out[b];
                bool cyc = false;
                while (frontier) {
                    int v = std::countr_zero(frontier);
                    frontier &= frontier - 1;
                    if (v == a) {
                        cyc = true;
                        break;
                    }
                    if (seen & bit(v)) continue;
                    seen |= bit(v);
                    frontier |= out[v] & ~seen;
                }
                if (cyc) {
                    out[a] &= ~bit(b);
                    und[a] |= bit(b);
                    und[b] |= bit(a);
                    conflicts.insert({std::min(a, b), std::max(a, b)});
                    removed = true;
                    break;
                }
            }
    }
}

}  // namespace

PcResult pc_search(const Dataset& data, const CiTestConfig& cfg) {
    validate(cfg);
    const int d = data.cols();
    if (d < 2) throw ParameterError("PC needs at least two variables");
    FisherZTest test(data);
    const double critical = fisher_z_critical_value(cfg.alpha);
    const int n = data.rows();

    std::vector<NodeMask> adj(d, 0);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (i != j) adj[i] |= bit(j);
    std::map<std::pair<int, int>, NodeSet> sepset;

    int level = 0;
    PcResult result;
    for (;; ++level) {
        if (cfg.max_condition_size >= 0 && level > cfg.max_condition_size) break;
        if (n <= level + 3) break;
        bool any_testable = false;
        const std::vector<NodeMask> frozen = adj;
        for (int i = 0; i < d; ++i) {
            for (int j = i + 1; j < d; ++j) {
                if (!(adj[i] & bit(j))) continue;
                for (auto [x, y] : {std::pair{i, j}, std::pair{j, i}}) {
                    if (!(adj[i] & bit(j))) break;
                    const NodeSet candidates = to_node_set(frozen[x] & ~bit(y));
                    if (static_cast<int>(candidates.size()) < level) continue;
                    any_testable = true;
                    any_combination(candidates, level, [&](const NodeSet& s) {
                        if (std::abs(test.statistic(x, y, s)) <= critical) {
                            adj[i] &= ~bit(j);
                            adj[j] &= ~bit(i);
                            sepset[{i, j}] = s;
                            return true;
                        }
                        return false;
                    });
                }
            }
        }
        if (!any_testable) break;
        result.max_level = level;
    }
    result.ci_tests = test.tests_run();

    // Colliders i -> k <- j for unshielded triples with k outside sepset(i, j).
    std::vector<NodeMask> wanted(d, 0);
    for (int k = 0; k < d; ++k) {
        const NodeSet nb = to_node_set(adj[k]);
        for (std::size_t a = 0; a < nb.size(); ++a)
            for (std::size_t b = a + 1; b < nb.size(); ++b) {
                const int i = nb[a], j = nb[b];
                if (adj[i] & bit(j)) continue;
                const auto& s = sepset[{i, j}];
                if (std::find(s.begin(), s.end(), k) != s.end()) continue;
                wanted[i] |= bit(k);
                wanted[j] |= bit(k);
            }
    }
    std::set<std::pair<int, int>> conflicts;
    std::vector<NodeMask> out(d, 0), und = adj;
    for (int a = 0; a < d; ++a)
        for (int b : to_node_set(wanted[a])) {
            if (wanted[b] & bit(a)) {
                conflicts.insert({std::min(a, b), std::max(a, b)});
                continue;
            }
            out[a] |= bit(b);
            und[a] &= ~bit(b);
            und[b] &= ~bit(a);
        }
    break_cycles(out, und, conflicts);

    BoolMatrix directed(d), undirected(d);
    for (int i = 0; i < d; ++i) {
        directed.set_row(i, out[i]);
        undirected.set_row(i, und[i]);
    }
    auto meek = apply_meek_rules(Cpdag(data.column_labels, std::move(directed), std::move(undirected)),
                                 MeekConflictPolicy::leave_undirected);
    conflicts.insert(meek.conflicts.begin(), meek.conflicts.end());
    result.cpdag = std::move(meek.graph);
    result.conflicts.assign(conflicts.begin(), conflicts.end());
    return result;
}

Cpdag pc(const Dataset& data, const CiTestConfig& cfg) { return pc_search(data, cfg).cpdag; }

}  // namespace atebench
