#include "atebench/score.hpp"

#include <cmath>

#include "atebench/errors.hpp"

namespace atebench {

BicScore::BicScore(const Dataset& data) : n_(data.rows()) {
    validate(data);
    Eigen::MatrixXd centred = data.values.rowwise() - data.values.colwise().mean();
    cov_ = (centred.transpose() * centred) / static_cast<double>(n_);
}

double BicScore::local(int node, NodeMask parent_set) const {
    const unsigned __int128 key = (static_cast<unsigned __int128>(node) << 64) | parent_set;
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;

    const NodeSet pa = to_node_set(parent_set);
    const int k = static_cast<int>(pa.size());
    double resid = cov_(node, node);
    if (k > 0) {
        Eigen::MatrixXd spp(k, k);
        Eigen::VectorXd spy(k);
        for (int a = 0; a < k; ++a) {
            spy(a) = cov_(pa[a], node);
            for (int b = 0; b < k; ++b) spp(a, b) = cov_(pa[a], pa[b]);
        }
        Eigen::LLT<Eigen::MatrixXd> llt(spp);
        if (llt.info() != Eigen::Success) throw DegenerateDataError("singular parent covariance in BIC score");
        resid -= spy.dot(llt.solve(spy));
    }
    if (!(resid > 0) || !std::isfinite(resid))
        throw DegenerateDataError("non-positive residual variance in BIC score");
    const double n = static_cast<double>(n_);
    const double score = -0.5 * n * std::log(resid) - 0.5 * (k + 1) * std::log(n);
    cache_.emplace(key, score);
    return score;
}

double BicScore::total(const Dag& g) const {
    double s = 0.0;
    for (int v = 0; v < g.size(); ++v) s += local(v, g.parents_mask(v));
    return s;
}

}  // namespace atebench
