#include "atebench/ges.hpp"

#include "atebench/errors.hpp"
#include "atebench/mec.hpp"
#include "atebench/score.hpp"

namespace atebench {

namespace {

// Minimum score gain that counts as an improvement.
constexpr double kMinGain = 1e-10;

struct Pdag {
    std::vector<NodeMask> out, in, und;

    explicit Pdag(const Cpdag& p) : out(p.size()), in(p.size(), 0), und(p.size()) {
        for (int i = 0; i < p.size(); ++i) {
            out[i] = p.directed().row(i);
            und[i] = p.undirected().row(i);
        }
        for (int i = 0; i < p.size(); ++i)
            for (int j : to_node_set(out[i])) in[j] |= bit(i);
    }

    int size() const { return static_cast<int>(out.size()); }
    NodeMask adj(int v) const { return out[v] | in[v] | und[v]; }

    bool is_clique(NodeMask set) const {
        for (int v : to_node_set(set))
            if ((set & ~bit(v) & ~adj(v)) != 0) return false;
        return true;
    }

    // Is there a semi-directed path from `from` to `to` avoiding `blocked`?
    bool semi_directed_path(int from, int to, NodeMask blocked) const {
        NodeMask seen = bit(from);
        NodeMask frontier = (out[from] | und[from]) & ~blocked;
        while (frontier) {
            int v = std::countr_zero(frontier);
            frontier &= frontier - 1;
            if (v == to) return true;
            if (seen & bit(v)) continue;
            seen |= bit(v);
            frontier |= (out[v] | und[v]) & ~blocked & ~seen;
        }
        return false;
    }

    void set_directed(int a, int b) {
        und[a] &= ~bit(b);
        und[b] &= ~bit(a);
        out[a] |= bit(b);
        in[b] |= bit(a);
    }

    void remove_edge(int a, int b) {
        und[a] &= ~bit(b);
        und[b] &= ~bit(a);
        out[a] &= ~bit(b);
        in[b] &= ~bit(a);
        out[b] &= ~bit(a);
        in[a] &= ~bit(b);
    }

    Cpdag to_cpdag(const NodeLabels& labels) const {
        BoolMatrix directed(size()), undirected(size());
        for (int i = 0; i < size(); ++i) {
            directed.set_row(i, out[i]);
            undirected.set_row(i, und[i]);
        }
        return Cpdag(labels, std::move(directed), std::move(undirected));
    }
};

// Calls f(sub) for every subset of mask, including the empty set.
template <typename F>
void for_each_subset(NodeMask mask, F&& f) {
    NodeMask sub = 0;
    for (;;) {
        f(sub);
        if (sub == mask) return;
        sub = (sub - mask) & mask;
    }
}

struct Operator {
    double gain = kMinGain;
    int x = -1, y = -1;
    NodeMask subset = 0;
    bool valid() const { return x >= 0; }
};

Cpdag complete(const Pdag& p, const NodeLabels& labels) {
    Dag ext;
    try {
        ext = consistent_extension(p.to_cpdag(labels), 0);
    } catch (const ExtensionError&) {
        throw DiscoveryError("GES produced a graph without a consistent extension");
    }
    return cpdag_of(ext);
}

}  // namespace

GesResult ges_search(const Dataset& data) {
    validate(data);
    const int d = data.cols();
    if (data.rows() < d + 2) throw SampleSizeError("GES needs n >= d + 2");
    BicScore score(data);
    const NodeLabels& labels = data.column_labels;

    Cpdag current = Cpdag(labels, BoolMatrix(d), BoolMatrix(d));
    GesResult result;
    result.score = 0.0;
    for (int v = 0; v < d; ++v) result.score += score.local(v, 0);

    // Forward phase.
    for (;;) {
        Pdag g(current);
        Operator best;
        for (int y = 0; y < d; ++y) {
            const NodeMask pa_y = g.in[y];
            for (int x = 0; x < d; ++x) {
                if (x == y || (g.adj(y) & bit(x))) continue;
                const NodeMask na = g.und[y] & g.adj(x);
                const NodeMask t0 = g.und[y] & ~g.adj(x) & ~bit(x);
                for_each_subset(t0, [&](NodeMask t) {
                    const NodeMask cond = na | t;
                    if (!g.is_clique(cond)) return;
                    if (g.semi_directed_path(y, x, cond)) return;
                    const double gain = score.local(y, cond | pa_y | bit(x)) - score.local(y, cond | pa_y);
                    if (gain > best.gain) best = Operator{gain, x, y, t};
                });
            }
        }
        if (!best.valid()) break;
        g.set_directed(best.x, best.y);
        for (int t : to_node_set(best.subset)) g.set_directed(t, best.y);
        current = complete(g, labels);
        result.score += best.gain;
        ++result.inserts;
    }

    // Backward phase.
    for (;;) {
        Pdag g(current);
        Operator best;
        for (int y = 0; y < d; ++y) {
            const NodeMask pa_y = g.in[y];
            for (int x : to_node_set(g.in[y] | g.und[y])) {
                const NodeMask na = g.und[y] & g.adj(x);
                for_each_subset(na, [&](NodeMask h) {
                    const NodeMask rest = na & ~h;
                    if (!g.is_clique(rest)) return;
                    const double gain =
                        score.local(y, (rest | pa_y) & ~bit(x)) - score.local(y, rest | pa_y | bit(x));
                    if (gain > best.gain) best = Operator{gain, x, y, h};
                });
            }
        }
        if (!best.valid()) break;
        g.remove_edge(best.x, best.y);
        for (int h : to_node_set(best.subset)) {
            g.set_directed(best.y, h);
            if (g.und[best.x] & bit(h)) g.set_directed(best.x, h);
        }
        current = complete(g, labels);
        result.score += best.gain;
        ++result.deletes;
    }

    result.cpdag = std::move(current);
    return result;
}

Cpdag ges(const Dataset& data) { return ges_search(data).cpdag; }

}  // namespace atebench
