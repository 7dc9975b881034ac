#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "atebench/ci_test.hpp"
#include "atebench/mcmc.hpp"
#include "atebench/metrics.hpp"
#include "atebench/scm.hpp"

namespace atebench {

inline constexpr const char* kMethodBootstrapPc = "bootstrap-pc";
inline constexpr const char* kMethodBootstrapGes = "bootstrap-ges";
inline constexpr const char* kMethodStructureMcmc = "structure-mcmc";
inline constexpr const char* kMethodExternal = "external";

// Flat experiment configuration. In the text form every key appears at most
// once as `key = value`; unset keys and the value `auto` keep the defaults.
struct ExperimentConfig {
    // Synthetic defaults are 20 variables and 20 samples. With a dataset_path,
    // d must match the graph if given and n keeps the first n rows.
    std::optional<int> d;
    std::optional<int> n;
    int num_seeds = 26;
    int posterior_size = 1000;
    std::vector<std::string> methods = {kMethodBootstrapPc, kMethodBootstrapGes, kMethodStructureMcmc};
    std::optional<double> er_expected_edges;  // default d
    WeightRange weights;
    CiTestConfig ci;  // max_condition_size -1 means auto, see ci_test
    long mcmc_steps = 500000;
    long mcmc_burn_in = 100000;
    std::optional<long> mcmc_thin;  // default: (steps - burn_in) / posterior_size
    RegroupConfig regroup;
    std::vector<double> filter_grid = kDefaultFilterGrid;
    double treatment_value_a = 0.0;
    double treatment_value_b = 1.0;
    std::size_t mec_cap = 100000;
    unsigned workers = 1;
    std::filesystem::path output_root = "ate_bench_out";
    std::optional<std::filesystem::path> dataset_path;
    std::optional<std::filesystem::path> graph_path;
    std::uint64_t master_seed = 0;
    bool standardize = false;

    bool real_data() const { return dataset_path.has_value(); }
    int synthetic_d() const { return d.value_or(20); }
    int synthetic_n() const { return n.value_or(20); }
    double expected_edges() const { return er_expected_edges.value_or(synthetic_d()); }
    McmcConfig mcmc(std::uint64_t seed) const;
    // Condition sets capped at 3 above 11 variables, unlimited otherwise,
    // unless max_condition_size is given.
    CiTestConfig ci_test(int num_variables) const;
    EvaluationConfig evaluation() const { return {regroup, filter_grid}; }
};

// Recognized keys, in canonical order.
const std::vector<std::string>& config_keys();

// Throws ConfigError for unknown keys or unparsable values.
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

// Throws ConfigError when a field breaks its module's preconditions.
void validate(const ExperimentConfig& cfg);

// Canonical `key = value` text of every key.
std::string format_config(const ExperimentConfig& cfg);

// Digest of everything that can change results: all keys except workers and
// output_root.
std::string config_digest(const ExperimentConfig& cfg);

}  // namespace atebench
