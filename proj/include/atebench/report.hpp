#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "atebench/metrics.hpp"

namespace atebench {

// Pair reports of one method on one seed.
struct SeedReports {
    int seed_index = 0;
    std::vector<PairReport> pairs;
};

enum class Spread { standard_error, standard_deviation };

// Mean and spread of one metric; pairs where the metric is undefined are
// left out and counted in `excluded`.
struct Summary {
    double mean = 0.0;
    double spread = 0.0;
    int included = 0;
    int excluded = 0;
    bool defined() const { return included > 0; }
};

struct RelaxationSummary {
    double tolerance;
    Summary precision;
    Summary recall;
};

struct MethodSummary {
    std::string method;
    int seeds = 0;
    Spread spread = Spread::standard_error;
    Summary wd;
    Summary precision;
    Summary recall;
    std::vector<RelaxationSummary> relaxation;
};

// Several seeds: mean over pairs within each seed, then mean and standard
// error over the seed means. One seed: mean and sample standard deviation over
// pairs. Throws AggregationError when seeds cover different pair sets.
MethodSummary aggregate(const std::string& method, const std::vector<SeedReports>& seeds);

struct SeedFailure {
    int seed_index;
    std::string method;  // empty when the whole seed failed
    std::string message;
};

struct RunReport {
    std::string config_digest;
    std::vector<MethodSummary> methods;
    std::vector<SeedFailure> failures;
};

// method,wd_mean,wd_se,precision_mean,precision_se,recall_mean,recall_se
std::string format_report_csv(const RunReport& r);
// method,tolerance,precision_mean,precision_se,recall_mean,recall_se
std::string format_relaxation_csv(const RunReport& r);

// Per-pair metrics of one (seed, method). One row per pair and tolerance;
// the unfiltered row carries tolerance "raw", undefined metrics are "NA".
std::string format_pair_reports(const std::vector<PairReport>& pairs, const NodeLabels& labels,
                                const std::string& method, int seed_index, const std::string& digest);

struct PairReportsFile {
    std::string method;
    int seed_index = 0;
    std::string digest;
    NodeLabels labels;
    std::vector<PairReport> pairs;
};
PairReportsFile read_pair_reports(const std::filesystem::path& path);

// Regrouped modes for plotting: treatment,outcome,source_tag,mode_value,mass.
std::string format_histogram(const AteSweep& s, const RegroupConfig& cfg, const std::string& digest);

}  // namespace atebench
