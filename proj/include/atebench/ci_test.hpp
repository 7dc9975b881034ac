#pragma once

#include <Eigen/Dense>
#include <cstddef>

#include "atebench/graph.hpp"
#include "atebench/scm.hpp"

namespace atebench {

struct CiTestConfig {
    double alpha = 0.05;
    int max_condition_size = -1;  // -1: unlimited
};

void validate(const CiTestConfig& cfg);

// Fisher-z test on partial correlations. The correlation matrix is computed
// once; each query inverts the correlation submatrix of {i, j} and `cond`.
class FisherZTest {
public:
    explicit FisherZTest(const Dataset& data);

    int num_samples() const { return n_; }
    int num_variables() const { return static_cast<int>(corr_.rows()); }

    double partial_correlation(int i, int j, const NodeSet& cond) const;
    // sqrt(n - |cond| - 3) * atanh(r)
    double statistic(int i, int j, const NodeSet& cond) const;
    bool independent(int i, int j, const NodeSet& cond, double alpha) const;

    std::size_t tests_run() const { return tests_run_; }

private:
    int n_;
    Eigen::MatrixXd corr_;
    mutable std::size_t tests_run_ = 0;
};

// Φ^-1(1 - alpha/2)
double fisher_z_critical_value(double alpha);

bool fisher_z_ci_test(const Dataset& data, int i, int j, const NodeSet& cond, double alpha);

}  // namespace atebench
