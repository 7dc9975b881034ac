#include "atebench/mec.hpp"

#include <algorithm>

#include "atebench/errors.hpp"

namespace atebench {

Cpdag cpdag_of(const Dag& g) {
    const int d = g.size();
    BoolMatrix directed(d);
    BoolMatrix undirected = skeleton(g);
    for (const auto& v : v_structures(g)) {
        for (int parent : {v.i, v.j}) {
            directed.set(parent, v.k);
            undirected.set(parent, v.k, false);
            undirected.set(v.k, parent, false);
        }
    }
    return apply_meek_rules(Cpdag(g.labels(), std::move(directed), std::move(undirected)));
}

namespace {

class MecWalker {
public:
    MecWalker(const Cpdag& root, std::size_t cap)
        : target_(v_structures(root)), skeleton_(skeleton(root)), cap_(cap) {}

    void walk(const Cpdag& p) {
        const int d = p.size();
        int a = -1, b = -1;
        for (int i = 0; i < d && a < 0; ++i) {
            NodeMask later = p.undirected().row(i) & ~((bit(i) << 1) - 1);
            if (later) {
                a = i;
                b = std::countr_zero(later);
            }
        }
        if (a < 0) {
            accept(p);
            return;
        }
        for (auto [from, to] : {std::pair{a, b}, std::pair{b, a}}) {
            BoolMatrix directed = p.directed();
            BoolMatrix undirected = p.undirected();
            directed.set(from, to);
            undirected.set(from, to, false);
            undirected.set(to, from, false);
            if (!is_acyclic(directed)) continue;
            Cpdag next;
            try {
                next = apply_meek_rules(Cpdag(p.labels(), std::move(directed), std::move(undirected)));
            } catch (const InconsistencyError&) {
                continue;
            }
            // Directed colliders persist into every completion.
            if (v_structures(next) != target_) continue;
            walk(next);
        }
    }

    std::vector<Dag> take() { return std::move(members_); }

private:
    void accept(const Cpdag& p) {
        if (skeleton(p) != skeleton_ || v_structures(p) != target_) return;
        if (!is_acyclic(p.directed())) return;
        if (members_.size() >= cap_)
            throw CapacityError("Markov equivalence class exceeds cap of " + std::to_string(cap_) + " members",
                                members_.size());
        members_.emplace_back(p.labels(), p.directed());
    }

    std::vector<VStructure> target_;
    BoolMatrix skeleton_;
    std::size_t cap_;
    std::vector<Dag> members_;
};

}  // namespace

MecEnumeration enumerate_mec(const Dag& g, std::size_t cap) {
    if (cap < 1) throw ParameterError("MEC cap must be at least 1");
    MecEnumeration out{g, cpdag_of(g), {}, cap};
    MecWalker walker(out.cpdag, cap);
    walker.walk(out.cpdag);
    out.members = walker.take();
    std::sort(out.members.begin(), out.members.end(), [](const Dag& x, const Dag& y) {
        return lexicographic_compare(x.adjacency(), y.adjacency()) < 0;
    });
    out.members.erase(std::unique(out.members.begin(), out.members.end()), out.members.end());
    return out;
}

}  // namespace atebench
