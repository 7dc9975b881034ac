#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "atebench/ci_test.hpp"
#include "atebench/graph.hpp"
#include "atebench/scm.hpp"

namespace atebench {

// Weighted bag of DAGs approximating P(G | D).
struct PosteriorSample {
    std::vector<Dag> dags;
    std::vector<double> weights;  // positive, sum to 1
    std::string method_tag;
    std::uint64_t seed = 0;
};

inline constexpr double kWeightTolerance = 1e-12;

// Non-empty, matching lengths, positive weights normalized within 1e-12, shared labels.
void validate(const PosteriorSample& sample);

PosteriorSample uniform_posterior(std::vector<Dag> dags, std::string method_tag, std::uint64_t seed = 0);

enum class DiscoveryMethod { pc, ges };

std::string to_string(DiscoveryMethod m);

struct BootstrapOptions {
    CiTestConfig ci;
    unsigned workers = 1;
    int max_attempts = 10;
};

struct ReplicateDiagnostics {
    int index = 0;
    int attempts = 0;
    std::size_t ci_tests = 0;  // PC only
    double score = 0.0;        // GES only
    int conflicts = 0;
    // The learned graph had no consistent extension; undirected edges were
    // oriented along a topological order of its directed part instead.
    bool relaxed_extension = false;
};

struct BootstrapResult {
    PosteriorSample sample;
    std::vector<ReplicateDiagnostics> diagnostics;
};

// m resamples of the rows with replacement; each is learned with `method` and
// turned into one DAG by consistent_extension. Replicates that hit degenerate
// data are redrawn up to max_attempts times before the run aborts.
BootstrapResult bootstrap(DiscoveryMethod method, const Dataset& data, int m, std::uint64_t seed,
                          const BootstrapOptions& options = {});

// Extension used when the Dor-Tarsi procedure fails: keeps every directed edge
// and orients the rest along the lowest-index topological order of the directed part.
Dag relaxed_extension(const Cpdag& p);

// Row indices drawn uniformly with replacement.
Dataset resample_rows(const Dataset& data, std::uint64_t seed);

struct ExternalPosterior {
    PosteriorSample sample;
    std::vector<std::string> warnings;
};

// Either a directory of edge-list files (with optional manifest.csv listing
// `file,weight`) or one multi-graph edge-list file.
ExternalPosterior load_external_posterior(const std::filesystem::path& path);

inline constexpr const char* kManifestName = "manifest.csv";

// Writes one edge-list file per DAG plus manifest.csv.
void write_dag_directory(const std::filesystem::path& dir, const std::vector<Dag>& dags,
                         const std::vector<double>& weights);
// Single multi-graph file with per-graph weight lines.
std::string format_posterior(const PosteriorSample& sample);
void write_posterior(const std::filesystem::path& path, const PosteriorSample& sample);

}  // namespace atebench
