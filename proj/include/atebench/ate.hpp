#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "atebench/graph.hpp"
#include "atebench/mec.hpp"
#include "atebench/posterior.hpp"
#include "atebench/scm.hpp"

namespace atebench {

struct AteQuery {
    int treatment = 0;
    int outcome = 1;
    double treatment_value_b = 1.0;
    double reference_value_a = 0.0;
};

// One ATE per DAG of a bag, for a single (treatment, outcome) pair.
struct AteSampleSet {
    AteQuery query;
    std::vector<double> values;
    std::vector<double> weights;
    std::string source_tag;
};

inline constexpr const char* kTrueMecTag = "true-mec";

// Parents of the treatment: a valid backdoor set in any latent-free DAG.
NodeSet backdoor_adjustment_set(const Dag& g, const AteQuery& q);

// Cross-products of the column-centred data. Centring absorbs the intercept, so
// the OLS slopes of y on [1, S] come from the S x S block of this matrix.
class GramCache {
public:
    explicit GramCache(const Dataset& data);

    int num_samples() const { return n_; }
    const Eigen::MatrixXd& gram() const { return gram_; }
    const NodeLabels& labels() const { return labels_; }

private:
    int n_;
    Eigen::MatrixXd gram_;
    NodeLabels labels_;
};

struct AteEstimate {
    double value = 0.0;
    bool ridge_fallback = false;
};

// OLS of the outcome on [1, treatment, parents(treatment)], slope of the
// treatment times (b - a). Exactly 0.0 when the outcome is not a descendant of
// the treatment in g. Rank-deficient designs fall back to ridge with 1e-8.
AteEstimate estimate_ate(const Dag& g, const GramCache& gram, const AteQuery& q);
double estimate_ate(const Dag& g, const Dataset& data, const AteQuery& q);

inline constexpr double kRidgeLambda = 1e-8;

struct SweepOptions {
    double treatment_value_b = 1.0;
    double reference_value_a = 0.0;
    unsigned workers = 1;
};

// All d(d-1) ordered pairs, treatment-major, each with one value per DAG.
struct AteSweep {
    NodeLabels labels;
    std::string source_tag;
    std::vector<AteSampleSet> sets;
    std::size_t ridge_fallbacks = 0;

    const AteSampleSet& at(int treatment, int outcome) const;
    std::size_t num_dags() const { return sets.empty() ? 0 : sets.front().values.size(); }
};

std::size_t pair_index(int d, int treatment, int outcome);

AteSweep sweep(std::span<const Dag> dags, std::span<const double> weights, const std::string& source_tag,
               const Dataset& data, const SweepOptions& options = {});
AteSweep sweep(const PosteriorSample& sample, const Dataset& data, const SweepOptions& options = {});
// Uniform weight over MEC members, tagged "true-mec".
AteSweep sweep(const MecEnumeration& mec, const Dataset& data, const SweepOptions& options = {});

// Columnar stage-2 output. Layout:
//   # ate-samples source=<tag> digest=<digest> a=<reference> b=<treatment>
//   # nodes: <comma-separated labels>
//   treatment,outcome,dag_index,ate_value,weight
//   <one row per (pair, DAG), pair-major>
// Values are written in shortest round-trip form.
std::string format_ate_samples(const AteSweep& s, const std::string& digest);
void write_ate_samples(const std::filesystem::path& path, const AteSweep& s, const std::string& digest);

struct AteSamplesFile {
    AteSweep sweep;
    std::string digest;
};
AteSamplesFile read_ate_samples(const std::filesystem::path& path);

}  // namespace atebench
