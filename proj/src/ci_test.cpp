#include "atebench/ci_test.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <limits>

#include "atebench/errors.hpp"

namespace atebench {

void validate(const CiTestConfig& cfg) {
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
    if (cfg.max_condition_size < -1) throw ParameterError("max_condition_size must be >= 0 or -1");
}

FisherZTest::FisherZTest(const Dataset& data) : n_(data.rows()) {
    validate(data);
    Eigen::MatrixXd centred = data.values.rowwise() - data.values.colwise().mean();
    Eigen::MatrixXd cov = centred.transpose() * centred;
    Eigen::VectorXd sd = cov.diagonal().array().sqrt();
    for (int k = 0; k < sd.size(); ++k)
        if (!(sd(k) > 0)) throw DegenerateDataError("column '" + data.column_labels[k] + "' has zero variance");
    corr_ = cov.array() / (sd * sd.transpose()).array();
}

double FisherZTest::partial_correlation(int i, int j, const NodeSet& cond) const {
    const int d = num_variables();
    if (i < 0 || j < 0 || i >= d || j >= d || i == j) throw ParameterError("CI test needs two distinct valid indices");
    if (std::find(cond.begin(), cond.end(), i) != cond.end() || std::find(cond.begin(), cond.end(), j) != cond.end())
        throw ParameterError("conditioning set contains a tested variable");
    if (cond.empty()) return corr_(i, j);

    std::vector<int> idx{i, j};
    idx.insert(idx.end(), cond.begin(), cond.end());
    const int k = static_cast<int>(idx.size());
    Eigen::MatrixXd sub(k, k);
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) sub(a, b) = corr_(idx[a], idx[b]);
    Eigen::LLT<Eigen::MatrixXd> llt(sub);
    if (llt.info() != Eigen::Success) throw DegenerateDataError("singular correlation submatrix");
    Eigen::MatrixXd precision = llt.solve(Eigen::MatrixXd::Identity(k, k));
    return -precision(0, 1) / std::sqrt(precision(0, 0) * precision(1, 1));
}

double FisherZTest::statistic(int i, int j, const NodeSet& cond) const {
    const int dof = n_ - static_cast<int>(cond.size()) - 3;
    if (dof <= 0) throw SampleSizeError("Fisher-z test needs n > |cond| + 3");
    ++tests_run_;
    const double r = partial_correlation(i, j, cond);
    if (!std::isfinite(r)) throw DegenerateDataError("non-finite partial correlation");
    if (std::abs(r) >= 1.0) return std::copysign(std::numeric_limits<double>::infinity(), r);
    return std::sqrt(static_cast<double>(dof)) * std::atanh(r);
}

bool FisherZTest::independent(int i, int j, const NodeSet& cond, double alpha) const {
    return std::abs(statistic(i, j, cond)) <= fisher_z_critical_value(alpha);
}

double fisher_z_critical_value(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
    boost::math::normal standard(0.0, 1.0);
    return boost::math::quantile(standard, 1.0 - alpha / 2.0);
}

bool fisher_z_ci_test(const Dataset& data, int i, int j, const NodeSet& cond, double alpha) {
    return FisherZTest(data).independent(i, j, cond, alpha);
}

}  // namespace atebench
