#include "atebench/mcmc.hpp"

#include <cmath>
#include <random>

#include "atebench/errors.hpp"
#include "atebench/random.hpp"
#include "atebench/score.hpp"

namespace atebench {

namespace {

enum class MoveKind { add, remove, reverse };

struct Move {
    MoveKind kind;
    int from;
    int to;
};

class ChainState {
public:
    explicit ChainState(int d) : children_(d, 0), parents_(d, 0), reach_(d, 0) {}

    int size() const { return static_cast<int>(children_.size()); }
    NodeMask parents(int v) const { return parents_[v]; }

    void apply(const Move& m) {
        switch (m.kind) {
            case MoveKind::add:
                link(m.from, m.to);
                break;
            case MoveKind::remove:
                unlink(m.from, m.to);
                break;
            case MoveKind::reverse:
                unlink(m.from, m.to);
                link(m.to, m.from);
                break;
        }
        dirty_ = true;
    }

    // Valid moves in canonical order: additions, deletions, reversals, each by (from, to).
    void moves(std::vector<Move>& out) {
        refresh();
        out.clear();
        const int d = size();
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                if (i == j || (children_[i] & bit(j)) || (children_[j] & bit(i))) continue;
                if (reach_[j] & bit(i)) continue;  // j ~> i would close a cycle
                out.push_back({MoveKind::add, i, j});
            }
        for (int i = 0; i < d; ++i)
            for (int j : to_node_set(children_[i])) out.push_back({MoveKind::remove, i, j});
        for (int i = 0; i < d; ++i)
            for (int j : to_node_set(children_[i]))
                if (!has_indirect_path(i, j)) out.push_back({MoveKind::reverse, i, j});
    }

    long move_count() {
        refresh();
        const int d = size();
        long count = 0;
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                if (i == j || (children_[i] & bit(j)) || (children_[j] & bit(i))) continue;
                if (!(reach_[j] & bit(i))) ++count;
            }
            for (int j : to_node_set(children_[i])) count += has_indirect_path(i, j) ? 1 : 2;
        }
        return count;
    }

    BoolMatrix adjacency() const {
        BoolMatrix m(size());
        for (int i = 0; i < size(); ++i) m.set_row(i, children_[i]);
        return m;
    }

private:
    void link(int a, int b) {
        children_[a] |= bit(b);
        parents_[b] |= bit(a);
    }
    void unlink(int a, int b) {
        children_[a] &= ~bit(b);
        parents_[b] &= ~bit(a);
    }

    // Another path a ~> b besides the edge itself.
    bool has_indirect_path(int a, int b) const {
        for (int c : to_node_set(children_[a] & ~bit(b)))
            if (reach_[c] & bit(b)) return true;
        return false;
    }

    void refresh() {
        if (!dirty_) return;
        auto order = topological_order(adjacency());
        for (auto it = order->rbegin(); it != order->rend(); ++it) {
            NodeMask r = children_[*it];
            for (int c : to_node_set(children_[*it])) r |= reach_[c];
            reach_[*it] = r;
        }
        dirty_ = false;
    }

    std::vector<NodeMask> children_;
    std::vector<NodeMask> parents_;
    std::vector<NodeMask> reach_;
    bool dirty_ = true;
};

double delta_score(const BicScore& score, const ChainState& g, const Move& m) {
    const NodeMask pa_to = g.parents(m.to);
    switch (m.kind) {
        case MoveKind::add:
            return score.local(m.to, pa_to | bit(m.from)) - score.local(m.to, pa_to);
        case MoveKind::remove:
            return score.local(m.to, pa_to & ~bit(m.from)) - score.local(m.to, pa_to);
        case MoveKind::reverse: {
            const NodeMask pa_from = g.parents(m.from);
            return score.local(m.to, pa_to & ~bit(m.from)) - score.local(m.to, pa_to) +
                   score.local(m.from, pa_from | bit(m.to)) - score.local(m.from, pa_from);
        }
    }
    return 0.0;
}

}  // namespace

long count_moves(const Dag& g) {
    ChainState s(g.size());
    for (int i = 0; i < g.size(); ++i)
        for (int j : children(g, i)) s.apply({MoveKind::add, i, j});
    return s.move_count();
}

McmcResult structure_mcmc_run(const Dataset& data, const McmcConfig& cfg) {
    if (cfg.burn_in < 0) throw ParameterError("burn_in must be >= 0");
    if (cfg.steps <= cfg.burn_in) throw ParameterError("steps must exceed burn_in");
    if (cfg.thin < 1) throw ParameterError("thin must be >= 1");
    validate(data);
    const int d = data.cols();
    if (d < 2) throw ParameterError("structure MCMC needs at least two variables");
    if (data.rows() < d + 2) throw SampleSizeError("structure MCMC needs n >= d + 2 for the BIC score");

    BicScore score(data);
    Rng rng = make_rng(cfg.seed, {3});
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    ChainState state(d);
    double current = 0.0;
    for (int v = 0; v < d; ++v) current += score.local(v, 0);

    McmcResult result;
    std::vector<Move> moves;
    std::vector<Dag> kept;
    for (long step = 1; step <= cfg.steps; ++step) {
        state.moves(moves);
        const long here = static_cast<long>(moves.size());
        std::uniform_int_distribution<long> pick(0, here - 1);
        const Move m = moves[pick(rng)];
        const double gain = delta_score(score, state, m);

        ChainState proposal = state;
        proposal.apply(m);
        const long there = proposal.move_count();
        const double log_ratio = gain + std::log(static_cast<double>(here)) - std::log(static_cast<double>(there));
        ++result.proposals;
        if (log_ratio >= 0.0 || std::log(unit(rng)) < log_ratio) {
            state = std::move(proposal);
            current += gain;
            ++result.accepted;
        }
        if (step > cfg.burn_in && (step - cfg.burn_in) % cfg.thin == 0)
            kept.emplace_back(data.column_labels, state.adjacency());
    }
    result.final_score = current;
    result.sample = uniform_posterior(std::move(kept), "structure-mcmc", cfg.seed);
    return result;
}

PosteriorSample structure_mcmc(const Dataset& data, long steps, long burn_in, long thin, std::uint64_t seed) {
    return structure_mcmc_run(data, McmcConfig{steps, burn_in, thin, seed}).sample;
}

}  // namespace atebench
