#pragma once

// Brute-force references written independently of the library's graph code.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>
#include <vector>

#include "atebench/graph.hpp"

namespace oracle {

using Rows = std::vector<std::vector<int>>;

inline bool acyclic(const Rows& a) {
    const int d = static_cast<int>(a.size());
    std::vector<int> indeg(d, 0);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) indeg[j] += a[i][j];
    std::vector<int> stack;
    for (int i = 0; i < d; ++i)
        if (indeg[i] == 0) stack.push_back(i);
    int seen = 0;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        ++seen;
        for (int j = 0; j < d; ++j)
            if (a[v][j] && --indeg[j] == 0) stack.push_back(j);
    }
    return seen == d;
}

// Every labelled DAG on d nodes, in increasing order of the off-diagonal bit code.
inline std::vector<Rows> all_dags(int d) {
    std::vector<std::pair<int, int>> slots;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (i != j) slots.emplace_back(i, j);
    std::vector<Rows> out;
    const unsigned long long total = 1ULL << slots.size();
    for (unsigned long long code = 0; code < total; ++code) {
        Rows a(d, std::vector<int>(d, 0));
        bool two_cycle = false;
        for (std::size_t s = 0; s < slots.size(); ++s)
            if ((code >> s) & 1ULL) {
                auto [i, j] = slots[s];
                if (a[j][i]) two_cycle = true;
                a[i][j] = 1;
            }
        if (!two_cycle && acyclic(a)) out.push_back(std::move(a));
    }
    return out;
}

// (skeleton, v-structures) identifies a Markov equivalence class.
using MecKey = std::pair<std::vector<int>, std::vector<std::tuple<int, int, int>>>;

inline MecKey mec_key(const Rows& a) {
    const int d = static_cast<int>(a.size());
    MecKey key;
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) key.first.push_back(a[i][j] || a[j][i]);
    for (int k = 0; k < d; ++k)
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j)
                if (a[i][k] && a[j][k] && !a[i][j] && !a[j][i]) key.second.emplace_back(i, k, j);
    std::sort(key.second.begin(), key.second.end());
    return key;
}

inline std::map<MecKey, std::vector<Rows>> group_by_mec(const std::vector<Rows>& dags) {
    std::map<MecKey, std::vector<Rows>> groups;
    for (const auto& g : dags) groups[mec_key(g)].push_back(g);
    return groups;
}

inline Rows rows_of(const atebench::Dag& g) {
    Rows a(g.size(), std::vector<int>(g.size(), 0));
    for (int i = 0; i < g.size(); ++i)
        for (int j = 0; j < g.size(); ++j) a[i][j] = g.has_edge(i, j);
    return a;
}

inline atebench::Dag to_dag(const Rows& a) {
    return atebench::Dag(atebench::NodeLabels::numbered(static_cast<int>(a.size())),
                         atebench::BoolMatrix::from_rows(a));
}

// Row-major flattening; std::vector comparison then gives the lexicographic
// order on adjacency bits.
inline std::vector<int> flat(const Rows& a) {
    std::vector<int> out;
    for (const auto& r : a) out.insert(out.end(), r.begin(), r.end());
    return out;
}

// Sum over directed paths t ~> y of the products of edge weights.
inline double path_sum(const Eigen::MatrixXd& w, int t, int y) {
    if (t == y) return 1.0;
    double total = 0.0;
    for (int k = 0; k < w.rows(); ++k)
        if (w(t, k) != 0.0) total += w(t, k) * path_sum(w, k, y);
    return total;
}

// Linear-Gaussian BIC by explicit least squares with an intercept column.
inline double bic(const Eigen::MatrixXd& x, const Rows& a) {
    const int n = static_cast<int>(x.rows());
    const int d = static_cast<int>(x.cols());
    double total = 0.0;
    for (int k = 0; k < d; ++k) {
        std::vector<int> pa;
        for (int i = 0; i < d; ++i)
            if (a[i][k]) pa.push_back(i);
        Eigen::MatrixXd design(n, pa.size() + 1);
        design.col(0).setOnes();
        for (std::size_t c = 0; c < pa.size(); ++c) design.col(c + 1) = x.col(pa[c]);
        const Eigen::VectorXd beta = design.colPivHouseholderQr().solve(x.col(k));
        const double rss = (x.col(k) - design * beta).squaredNorm();
        total += -0.5 * n * std::log(rss / n) - 0.5 * (pa.size() + 1) * std::log(static_cast<double>(n));
    }
    return total;
}

}  // namespace oracle
