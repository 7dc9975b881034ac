#pragma once

#include <Eigen/Dense>
#include <unordered_map>

#include "atebench/graph.hpp"
#include "atebench/scm.hpp"

namespace atebench {

// Linear-Gaussian BIC, decomposable over nodes:
//   local(k | Pa) = -(n/2) ln(RSS_k / n) - (|Pa| + 1)/2 ln n.
// Residual variances come from the biased covariance of the centred data.
// Local scores are memoized; an instance is not safe to share across threads.
class BicScore {
public:
    explicit BicScore(const Dataset& data);

    int num_samples() const { return n_; }
    int num_variables() const { return static_cast<int>(cov_.rows()); }

    // Throws DegenerateDataError for a singular parent covariance or a
    // non-positive residual variance.
    double local(int node, NodeMask parent_set) const;
    double total(const Dag& g) const;

private:
    int n_;
    Eigen::MatrixXd cov_;
    struct KeyHash {
        std::size_t operator()(unsigned __int128 k) const {
            return std::hash<std::uint64_t>{}(static_cast<std::uint64_t>(k) ^ static_cast<std::uint64_t>(k >> 64) * 0x9e3779b97f4a7c15ULL);
        }
    };
    mutable std::unordered_map<unsigned __int128, double, KeyHash> cache_;
};

}  // namespace atebench
