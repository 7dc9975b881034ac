#include "atebench/scm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "atebench/errors.hpp"
#include "atebench/random.hpp"
#include "atebench/text.hpp"

namespace atebench {

void validate(const Dataset& data) {
    if (data.rows() < 1) throw SchemaError("dataset has no rows");
    if (data.cols() != data.column_labels.size())
        throw SchemaError("dataset has " + std::to_string(data.cols()) + " columns but " +
                          std::to_string(data.column_labels.size()) + " labels");
}

LinearGaussianScm::LinearGaussianScm(Dag graph, Eigen::MatrixXd weights, Eigen::VectorXd noise_variances,
                                     Eigen::VectorXd intercepts)
    : graph_(std::move(graph)),
      weights_(std::move(weights)),
      noise_variances_(std::move(noise_variances)),
      intercepts_(std::move(intercepts)) {
    const int d = graph_.size();
    if (weights_.rows() != d || weights_.cols() != d || noise_variances_.size() != d || intercepts_.size() != d)
        throw ParameterError("SCM parameter dimensions do not match the graph");
    for (int i = 0; i < d; ++i) {
        if (!(noise_variances_(i) > 0)) throw ParameterError("noise variances must be strictly positive");
        for (int j = 0; j < d; ++j)
            if ((weights_(i, j) != 0.0) != graph_.has_edge(i, j))
                throw ParameterError("weight support differs from the graph at (" + graph_.labels()[i] + ", " +
                                     graph_.labels()[j] + ")");
    }
}

LinearGaussianScm::LinearGaussianScm(Dag graph, Eigen::MatrixXd weights, Eigen::VectorXd noise_variances)
    : LinearGaussianScm(graph, std::move(weights), std::move(noise_variances),
                        Eigen::VectorXd::Zero(graph.size())) {}

Dag random_er_dag(int d, double expected_edges, std::uint64_t seed, const NodeLabels& labels) {
    if (d < 2) throw ParameterError("random_er_dag needs d >= 2");
    if (expected_edges < 0) throw ParameterError("expected_edges must be non-negative");
    const double pairs = 0.5 * d * (d - 1);
    const double p = expected_edges / pairs;
    if (p > 1.0) throw ParameterError("expected_edges exceeds the number of node pairs");
    NodeLabels names = labels.size() ? labels : NodeLabels::numbered(d);
    if (names.size() != d) throw ParameterError("label count does not match d");

    Rng rng = make_rng(seed, {0});
    std::vector<int> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::bernoulli_distribution coin(p);
    BoolMatrix adj(d);
    for (int a = 0; a < d; ++a)
        for (int b = a + 1; b < d; ++b)
            if (coin(rng)) adj.set(order[a], order[b]);
    return Dag(std::move(names), std::move(adj));
}

LinearGaussianScm random_scm(const Dag& g, WeightRange range, std::uint64_t seed) {
    if (!(range.low > 0) || !(range.low < range.high)) throw ParameterError("weight range must satisfy 0 < low < high");
    const int d = g.size();
    Rng rng = make_rng(seed, {1});
    std::uniform_real_distribution<double> magnitude(range.low, range.high);
    std::bernoulli_distribution negative(0.5);
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (g.has_edge(i, j)) {
                double m = magnitude(rng);
                w(i, j) = negative(rng) ? -m : m;
            }
    return LinearGaussianScm(g, std::move(w), Eigen::VectorXd::Ones(d));
}

Eigen::MatrixXd standard_normal_noise(int n, int d, std::uint64_t seed) {
    Eigen::MatrixXd eps(n, d);
    for (int k = 0; k < d; ++k) {
        Rng rng = make_rng(seed, {2, static_cast<std::uint64_t>(k)});
        std::normal_distribution<double> normal(0.0, 1.0);
        for (int r = 0; r < n; ++r) eps(r, k) = normal(rng);
    }
    return eps;
}

Eigen::MatrixXd propagate(const LinearGaussianScm& scm, const Eigen::MatrixXd& unit_noise) {
    const int d = scm.size();
    if (unit_noise.cols() != d) throw ParameterError("noise matrix has the wrong number of columns");
    const auto order = *topological_order(scm.graph().adjacency());
    Eigen::MatrixXd x(unit_noise.rows(), d);
    for (int k : order) {
        x.col(k) = unit_noise.col(k) * std::sqrt(scm.noise_variances()(k));
        x.col(k).array() += scm.intercepts()(k);
        for (int i : parents(scm.graph(), k)) x.col(k) += scm.weights()(i, k) * x.col(i);
    }
    return x;
}

Dataset sample(const LinearGaussianScm& scm, int n, std::uint64_t seed) {
    if (n < 1) throw ParameterError("sample size must be at least 1");
    Dataset data;
    data.values = propagate(scm, standard_normal_noise(n, scm.size(), seed));
    data.column_labels = scm.graph().labels();
    data.provenance = "synthetic:linear-gaussian:n=" + std::to_string(n) + ":seed=" + std::to_string(seed);
    return data;
}

double analytic_total_effect(const LinearGaussianScm& scm, int treatment, int outcome) {
    const int d = scm.size();
    if (treatment < 0 || treatment >= d || outcome < 0 || outcome >= d)
        throw ParameterError("treatment/outcome index out of range");
    if (treatment == outcome) throw ParameterError("treatment and outcome must differ");
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(d, d) - scm.weights();
    // (I - W) is unit triangular under a topological order, so the LU is exact in structure.
    Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
    e(outcome) = 1.0;
    Eigen::VectorXd column = m.partialPivLu().solve(e);
    return column(treatment);
}

// ---------------------------------------------------------------------------
// CSV

Dataset read_dataset_csv(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        for (auto& h : split(line, ',')) {
            std::string name = trim(h);
            if (name.size() >= 2 && name.front() == '"' && name.back() == '"') name = name.substr(1, name.size() - 2);
            header.push_back(name);
        }
        break;
    }
    if (header.empty()) throw SchemaError(path.string() + ": missing header row");
    std::vector<std::vector<double>> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty()) continue;
        auto cells = split(line, ',');
        if (cells.size() != header.size())
            throw SchemaError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                              std::to_string(header.size()) + " fields");
        std::vector<double> row;
        row.reserve(cells.size());
        for (auto& c : cells) {
            auto v = parse_double(c);
            if (!v) throw SchemaError(path.string() + ":" + std::to_string(line_no) + ": bad number '" + trim(c) + "'");
            row.push_back(*v);
        }
        rows.push_back(std::move(row));
    }
    Dataset data;
    try {
        data.column_labels = NodeLabels(header);
    } catch (const StructuralError& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
    data.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(header.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < header.size(); ++c) data.values(r, c) = rows[r][c];
    data.provenance = "file:" + path.filename().string() + ":fnv1a=" + fnv1a_hex(text);
    validate(data);
    return data;
}

std::string format_dataset_csv(const Dataset& data) {
    std::string out;
    for (int c = 0; c < data.cols(); ++c) {
        if (c) out += ',';
        out += data.column_labels[c];
    }
    out += '\n';
    for (int r = 0; r < data.rows(); ++r) {
        for (int c = 0; c < data.cols(); ++c) {
            if (c) out += ',';
            out += format_double(data.values(r, c));
        }
        out += '\n';
    }
    return out;
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data) {
    write_file_atomic(path, format_dataset_csv(data));
}

Dataset standardized(const Dataset& data) {
    Dataset out = data;
    const int n = data.rows();
    for (int c = 0; c < data.cols(); ++c) {
        auto col = out.values.col(c);
        const double mean = col.mean();
        col.array() -= mean;
        const double sd = n > 1 ? std::sqrt(col.squaredNorm() / (n - 1)) : 0.0;
        if (sd > 0) col /= sd;
    }
    out.provenance += ":standardized";
    return out;
}

Dataset align_columns(const Dataset& data, const NodeLabels& labels) {
    Dataset out;
    out.values.resize(data.rows(), labels.size());
    for (int k = 0; k < labels.size(); ++k) {
        int idx = data.column_labels.index_of(labels[k]);
        if (idx < 0) throw SchemaError("dataset is missing column '" + labels[k] + "'");
        out.values.col(k) = data.values.col(idx);
    }
    if (data.cols() != labels.size())
        throw SchemaError("dataset has " + std::to_string(data.cols()) + " columns but the graph has " +
                          std::to_string(labels.size()) + " nodes");
    out.column_labels = labels;
    out.provenance = data.provenance;
    return out;
}

}  // namespace atebench
