#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "atebench/config.hpp"
#include "atebench/report.hpp"

namespace atebench {

inline constexpr const char* kSoftwareVersion = "ate-bench 0.1.0";

// Per-seed stages in execution order. generate covers the truth graph, the
// dataset and the MEC of the truth; ate_sweep covers both the true-MEC side
// and every method's posterior.
enum class Stage { generate, discover, ate_sweep, evaluate };
std::string to_string(Stage s);

struct RunOptions {
    Stage through = Stage::evaluate;
    // Replaces the discovery methods with one externally produced posterior.
    std::optional<std::filesystem::path> external_posterior;
};

// Runs every seed through `options.through`, skipping stages whose marker is
// already present. A failing seed (or seed and method) is recorded and the run
// moves on. Throws before any computation when the config is invalid, the
// inputs disagree on labels, or output_root holds a different config.
std::vector<SeedFailure> run_stages(const ExperimentConfig& cfg, const RunOptions& options = {});

// Aggregates the per-seed pair reports under `output_root` into report.csv and
// relaxation.csv. Refuses pair reports whose digest differs from the manifest.
RunReport build_report(const std::filesystem::path& output_root);

RunReport run_synthetic(const ExperimentConfig& cfg);
RunReport run_real(const ExperimentConfig& cfg);
RunReport evaluate_external(const std::filesystem::path& posterior_path, const ExperimentConfig& cfg);

// Artifact locations, relative to output_root.
std::filesystem::path seed_directory(int seed_index);
inline constexpr const char* kReportFile = "report.csv";
inline constexpr const char* kRelaxationFile = "relaxation.csv";
inline constexpr const char* kRunManifestFile = "manifest.json";
inline constexpr const char* kRunLogFile = "run_log.jsonl";

}  // namespace atebench
