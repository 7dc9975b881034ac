#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>

#include "atebench/graph.hpp"

namespace atebench {

struct Dataset {
    Eigen::MatrixXd values;  // n x d, one column per label
    NodeLabels column_labels;
    std::string provenance;

    int rows() const { return static_cast<int>(values.rows()); }
    int cols() const { return static_cast<int>(values.cols()); }
};

// Throws SchemaError unless values and labels agree and n >= 1.
void validate(const Dataset& data);

class LinearGaussianScm {
public:
    // weights(i, j) != 0 exactly on edges i -> j; noise variances > 0.
    LinearGaussianScm(Dag graph, Eigen::MatrixXd weights, Eigen::VectorXd noise_variances,
                      Eigen::VectorXd intercepts);
    LinearGaussianScm(Dag graph, Eigen::MatrixXd weights, Eigen::VectorXd noise_variances);

    const Dag& graph() const { return graph_; }
    const Eigen::MatrixXd& weights() const { return weights_; }
    const Eigen::VectorXd& noise_variances() const { return noise_variances_; }
    const Eigen::VectorXd& intercepts() const { return intercepts_; }
    int size() const { return graph_.size(); }

private:
    Dag graph_;
    Eigen::MatrixXd weights_;
    Eigen::VectorXd noise_variances_;
    Eigen::VectorXd intercepts_;
};

struct WeightRange {
    double low = 0.5;
    double high = 2.0;
};

// Erdos-Renyi skeleton with p = expected_edges / C(d, 2), oriented along a
// uniformly random permutation.
Dag random_er_dag(int d, double expected_edges, std::uint64_t seed, const NodeLabels& labels = {});

// Edge weights uniform on +-[low, high]; unit noise variances; zero intercepts.
LinearGaussianScm random_scm(const Dag& g, WeightRange range, std::uint64_t seed);

// n x d standard-normal draws, column k from its own seeded stream.
Eigen::MatrixXd standard_normal_noise(int n, int d, std::uint64_t seed);

// Pushes unit-variance noise through the structural equations in topological
// order: x_k = intercept_k + sum_i w(i,k) x_i + sqrt(var_k) * noise_k.
Eigen::MatrixXd propagate(const LinearGaussianScm& scm, const Eigen::MatrixXd& unit_noise);

Dataset sample(const LinearGaussianScm& scm, int n, std::uint64_t seed);

// Entry (treatment, outcome) of (I - W)^-1, the sum over directed paths of
// edge-weight products. With treatment values (0, 1) this is the ATE.
double analytic_total_effect(const LinearGaussianScm& scm, int treatment, int outcome);

// CSV with a header row of column labels.
Dataset read_dataset_csv(const std::filesystem::path& path);
std::string format_dataset_csv(const Dataset& data);
void write_dataset_csv(const std::filesystem::path& path, const Dataset& data);

// Columns centred and scaled to unit sample standard deviation.
Dataset standardized(const Dataset& data);

// Reorders columns to `labels`; throws SchemaError naming a missing column.
Dataset align_columns(const Dataset& data, const NodeLabels& labels);

}  // namespace atebench
