#include "atebench/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>

#include "json.hpp"

#include "atebench/ate.hpp"
#include "atebench/errors.hpp"
#include "atebench/graph_io.hpp"
#include "atebench/mcmc.hpp"
#include "atebench/mec.hpp"
#include "atebench/parallel.hpp"
#include "atebench/posterior.hpp"
#include "atebench/random.hpp"
#include "atebench/text.hpp"

namespace atebench {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string to_string(Stage s) {
    switch (s) {
        case Stage::generate: return "generate";
        case Stage::discover: return "discover";
        case Stage::ate_sweep: return "ate-sweep";
        case Stage::evaluate: return "evaluate";
    }
    return "unknown";
}

fs::path seed_directory(int seed_index) {
    char name[32];
    std::snprintf(name, sizeof name, "seed_%03d", seed_index);
    return name;
}

namespace {

constexpr const char* kTrueSide = "true";

// Stream ids under a seed's master; method ids are fixed so adding a method
// never shifts another method's draws.
enum : std::uint64_t { kGraphStream = 0, kWeightStream = 1, kDataStream = 2, kMethodStream = 3 };

std::uint64_t method_code(const std::string& m) {
    if (m == kMethodBootstrapPc) return 1;
    if (m == kMethodBootstrapGes) return 2;
    if (m == kMethodStructureMcmc) return 3;
    return 4;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Line-delimited JSON, appended under a lock.
class RunLog {
public:
    explicit RunLog(const fs::path& path) : out_(path, std::ios::app) {}

    void write(json event) {
        const auto now = std::chrono::system_clock::now().time_since_epoch();
        event["unix_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(now).count();
        std::lock_guard lock(mutex_);
        out_ << event.dump() << '\n';
        out_.flush();
    }

private:
    std::mutex mutex_;
    std::ofstream out_;
};

// Inputs shared by every seed of a real-data or external run, loaded up front
// so label problems surface before any computation.
struct Ingested {
    Dag truth;
    Dataset data;
    std::optional<PosteriorSample> external;
};

Ingested ingest(const ExperimentConfig& cfg, const RunOptions& options) {
    Ingested in;
    in.truth = read_dag(*cfg.graph_path);
    if (cfg.d && *cfg.d != in.truth.size())
        throw ConfigError("d = " + std::to_string(*cfg.d) + " but " + cfg.graph_path->string() + " has " +
                          std::to_string(in.truth.size()) + " nodes");
    Dataset raw = align_columns(read_dataset_csv(*cfg.dataset_path), in.truth.labels());
    if (cfg.n) {
        if (*cfg.n > raw.rows())
            throw ConfigError("n = " + std::to_string(*cfg.n) + " but the dataset has " + std::to_string(raw.rows()) +
                              " rows");
        raw.values = Eigen::MatrixXd(raw.values.topRows(*cfg.n));
        raw.provenance += ":first" + std::to_string(*cfg.n);
    }
    in.data = cfg.standardize ? standardized(raw) : std::move(raw);
    if (options.external_posterior) {
        auto ext = load_external_posterior(*options.external_posterior);
        if (!(ext.sample.dags.front().labels() == in.truth.labels()))
            throw SchemaError(options.external_posterior->string() + ": posterior labels differ from the truth graph");
        in.external = std::move(ext.sample);
    }
    return in;
}

class SeedRunner {
public:
    SeedRunner(const ExperimentConfig& cfg, const RunOptions& options, const std::vector<std::string>& methods,
               const std::string& digest, const Ingested* ingested, RunLog& log, int index, unsigned workers)
        : cfg_(cfg), options_(options), methods_(methods), digest_(digest), ingested_(ingested), log_(log),
          index_(index), workers_(workers), dir_(cfg.output_root / seed_directory(index)),
          seed_(derive_seed(cfg.master_seed, {static_cast<std::uint64_t>(index)})) {}

    std::vector<SeedFailure> run() {
        std::vector<SeedFailure> failures;
        try {
            generate();
            if (options_.through >= Stage::ate_sweep) true_sweep();
        } catch (const std::exception& e) {
            record_failure(failures, "", e.what());
            return failures;
        }
        if (options_.through == Stage::generate) return failures;
        for (const auto& m : methods_) {
            try {
                discover(m);
                if (options_.through >= Stage::ate_sweep) learned_sweep(m);
                if (options_.through >= Stage::evaluate) evaluate(m);
                fs::remove(dir_ / m / "error.txt");
            } catch (const std::exception& e) {
                fs::create_directories(dir_ / m);
                write_file_atomic(dir_ / m / "error.txt", std::string(e.what()) + "\n");
                record_failure(failures, m, e.what());
            }
        }
        return failures;
    }

private:
    bool done(const fs::path& marker) const {
        if (!fs::exists(marker)) return false;
        if (trim(read_file(marker)) != digest_)
            throw ConfigError(marker.string() + " was written under a different config");
        return true;
    }

    void mark(const fs::path& marker, Stage stage, const std::string& side, double seconds, json extra = {}) {
        write_file_atomic(marker, digest_ + "\n");
        json e = {{"event", "stage_done"}, {"seed", index_}, {"stage", to_string(stage)}, {"seconds", seconds}};
        if (!side.empty()) e["method"] = side;
        if (!extra.is_null()) e["details"] = std::move(extra);
        log_.write(std::move(e));
    }

    void record_failure(std::vector<SeedFailure>& failures, const std::string& method, const std::string& what) {
        failures.push_back({index_, method, what});
        json e = {{"event", "failure"}, {"seed", index_}, {"message", what}};
        if (!method.empty()) e["method"] = method;
        log_.write(std::move(e));
    }

    void generate() {
        const fs::path marker = dir_ / "generate.done";
        if (done(marker)) return;
        const auto t0 = std::chrono::steady_clock::now();
        fs::create_directories(dir_);
        Dag truth;
        Dataset data;
        json extra;
        if (ingested_) {
            truth = ingested_->truth;
            data = ingested_->data;
        } else {
            truth = random_er_dag(cfg_.synthetic_d(), cfg_.expected_edges(), derive_seed(seed_, {kGraphStream}));
            const auto scm = random_scm(truth, cfg_.weights, derive_seed(seed_, {kWeightStream}));
            data = sample(scm, cfg_.synthetic_n(), derive_seed(seed_, {kDataStream}));
        }
        const auto mec = enumerate_mec(truth, cfg_.mec_cap);
        write_dag(dir_ / "truth.graph", truth);
        write_dataset_csv(dir_ / "data.csv", data);
        const std::vector<double> weights(mec.members.size(), 1.0 / static_cast<double>(mec.members.size()));
        write_dag_directory(dir_ / "mec", mec.members, weights);
        extra = {{"edges", truth.num_edges()}, {"mec_size", mec.members.size()}, {"rows", data.rows()}};
        data_ = std::move(data);
        mark(marker, Stage::generate, "", seconds_since(t0), std::move(extra));
    }

    const Dataset& data() {
        if (!data_) data_ = read_dataset_csv(dir_ / "data.csv");
        return *data_;
    }

    SweepOptions sweep_options() const { return {cfg_.treatment_value_b, cfg_.treatment_value_a, workers_}; }

    void true_sweep() {
        const fs::path side = dir_ / kTrueSide;
        const fs::path marker = side / "ate-sweep.done";
        if (done(marker)) return;
        const auto t0 = std::chrono::steady_clock::now();
        const auto mec = load_external_posterior(dir_ / "mec").sample;
        AteSweep s = sweep(mec.dags, mec.weights, kTrueMecTag, data(), sweep_options());
        fs::create_directories(side);
        write_ate_samples(side / "ate.csv", s, digest_);
        write_file_atomic(side / "histogram.csv", format_histogram(s, cfg_.regroup, digest_));
        mark(marker, Stage::ate_sweep, kTrueSide, seconds_since(t0),
             {{"dags", s.num_dags()}, {"ridge_fallbacks", s.ridge_fallbacks}});
    }

    void discover(const std::string& method) {
        const fs::path side = dir_ / method;
        const fs::path marker = side / "discover.done";
        if (done(marker)) return;
        const auto t0 = std::chrono::steady_clock::now();
        fs::create_directories(side);
        const std::uint64_t seed = derive_seed(seed_, {kMethodStream, method_code(method)});
        PosteriorSample posterior;
        json extra;
        if (method == kMethodExternal) {
            posterior = *ingested_->external;
        } else if (method == kMethodStructureMcmc) {
            auto res = structure_mcmc_run(data(), cfg_.mcmc(seed));
            posterior = std::move(res.sample);
            extra = {{"proposals", res.proposals}, {"accepted", res.accepted}, {"final_score", res.final_score}};
        } else {
            BootstrapOptions opts;
            opts.ci = cfg_.ci_test(data().cols());
            opts.workers = workers_;
            const auto kind = method == kMethodBootstrapPc ? DiscoveryMethod::pc : DiscoveryMethod::ges;
            auto res = bootstrap(kind, data(), cfg_.posterior_size, seed, opts);
            std::string diag = "replicate,attempts,ci_tests,score,conflicts,relaxed_extension\n";
            int relaxed = 0;
            for (const auto& r : res.diagnostics) {
                log_.write({{"event", "replicate"}, {"seed", index_}, {"method", method}, {"replicate", r.index},
                            {"attempts", r.attempts}, {"ci_tests", r.ci_tests}, {"score", r.score},
                            {"conflicts", r.conflicts}, {"relaxed_extension", r.relaxed_extension}});
                diag += std::to_string(r.index) + "," + std::to_string(r.attempts) + "," + std::to_string(r.ci_tests) +
                        "," + format_double(r.score) + "," + std::to_string(r.conflicts) + "," +
                        (r.relaxed_extension ? "1" : "0") + "\n";
                relaxed += r.relaxed_extension;
            }
            write_file_atomic(side / "diagnostics.csv", diag);
            posterior = std::move(res.sample);
            extra = {{"relaxed_extensions", relaxed}};
        }
        write_posterior(side / "posterior.graphs", posterior);
        extra["dags"] = posterior.dags.size();
        mark(marker, Stage::discover, method, seconds_since(t0), std::move(extra));
    }

    void learned_sweep(const std::string& method) {
        const fs::path side = dir_ / method;
        const fs::path marker = side / "ate-sweep.done";
        if (done(marker)) return;
        const auto t0 = std::chrono::steady_clock::now();
        const auto posterior = load_external_posterior(side / "posterior.graphs").sample;
        AteSweep s = sweep(posterior.dags, posterior.weights, method, data(), sweep_options());
        write_ate_samples(side / "ate.csv", s, digest_);
        write_file_atomic(side / "histogram.csv", format_histogram(s, cfg_.regroup, digest_));
        mark(marker, Stage::ate_sweep, method, seconds_since(t0),
             {{"dags", s.num_dags()}, {"ridge_fallbacks", s.ridge_fallbacks}});
    }

    void evaluate(const std::string& method) {
        const fs::path side = dir_ / method;
        const fs::path marker = side / "evaluate.done";
        if (done(marker)) return;
        const auto t0 = std::chrono::steady_clock::now();
        const auto truth = read_ate_samples(dir_ / kTrueSide / "ate.csv");
        const auto learned = read_ate_samples(side / "ate.csv");
        if (truth.digest != digest_ || learned.digest != digest_)
            throw AggregationError("ATE samples of seed " + std::to_string(index_) + " carry a different digest");
        const auto pairs = evaluate_sweeps(truth.sweep, learned.sweep, cfg_.evaluation());
        write_file_atomic(side / "pairs.csv",
                          format_pair_reports(pairs, truth.sweep.labels, method, index_, digest_));
        mark(marker, Stage::evaluate, method, seconds_since(t0), {{"pairs", pairs.size()}});
    }

    const ExperimentConfig& cfg_;
    const RunOptions& options_;
    const std::vector<std::string>& methods_;
    const std::string& digest_;
    const Ingested* ingested_;
    RunLog& log_;
    int index_;
    unsigned workers_;
    fs::path dir_;
    std::uint64_t seed_;
    std::optional<Dataset> data_;
};

std::string mode_of(const ExperimentConfig& cfg, const RunOptions& options) {
    if (options.external_posterior) return "external";
    return cfg.real_data() ? "real" : "synthetic";
}

json config_json(const ExperimentConfig& cfg) {
    json out = json::object();
    std::istringstream in(format_config(cfg));
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find(" = ");
        out[line.substr(0, eq)] = line.substr(eq + 3);
    }
    return out;
}

std::string effective_digest(const ExperimentConfig& cfg, const RunOptions& options) {
    if (!options.external_posterior) return config_digest(cfg);
    return fnv1a_hex(config_digest(cfg) + "|external=" + options.external_posterior->string());
}

json stage_status(const fs::path& root, int seeds, const std::vector<std::string>& methods) {
    json out = json::array();
    for (int s = 0; s < seeds; ++s) {
        const fs::path dir = seed_directory(s);
        json stages = json::object();
        json artifacts = json::object();
        auto record = [&](const std::string& stage, const fs::path& marker,
                          std::vector<std::pair<std::string, fs::path>> outputs) {
            const bool complete = fs::exists(root / marker);
            stages[stage] = complete;
            if (complete)
                for (auto& [name, path] : outputs) artifacts[name] = path.string();
        };
        record("generate", dir / "generate.done",
               {{"truth", dir / "truth.graph"}, {"data", dir / "data.csv"}, {"mec", dir / "mec"}});
        record("true/ate-sweep", dir / kTrueSide / "ate-sweep.done",
               {{"true/ate", dir / kTrueSide / "ate.csv"}, {"true/histogram", dir / kTrueSide / "histogram.csv"}});
        for (const auto& m : methods) {
            record(m + "/discover", dir / m / "discover.done", {{m + "/posterior", dir / m / "posterior.graphs"}});
            record(m + "/ate-sweep", dir / m / "ate-sweep.done",
                   {{m + "/ate", dir / m / "ate.csv"}, {m + "/histogram", dir / m / "histogram.csv"}});
            record(m + "/evaluate", dir / m / "evaluate.done", {{m + "/pairs", dir / m / "pairs.csv"}});
        }
        out.push_back({{"index", s}, {"directory", dir.string()}, {"stages", stages}, {"artifacts", artifacts}});
    }
    return out;
}

}  // namespace

std::vector<SeedFailure> run_stages(const ExperimentConfig& cfg, const RunOptions& options) {
    validate(cfg);
    if (options.external_posterior && !cfg.real_data())
        throw ConfigError("evaluating an external posterior needs dataset_path and graph_path");
    const std::vector<std::string> methods =
        options.external_posterior ? std::vector<std::string>{kMethodExternal} : cfg.methods;
    const std::string digest = effective_digest(cfg, options);

    std::optional<Ingested> ingested;
    if (cfg.real_data()) ingested = ingest(cfg, options);

    const fs::path root = cfg.output_root;
    const fs::path manifest_path = root / kRunManifestFile;
    if (fs::exists(manifest_path)) {
        const auto previous = json::parse(read_file(manifest_path));
        if (previous.value("config_digest", "") != digest)
            throw ConfigError(root.string() + " holds results of a different config (digest " +
                              previous.value("config_digest", "?") + ", expected " + digest + ")");
    }
    fs::create_directories(root);

    json manifest = {{"software", kSoftwareVersion},
                     {"config_digest", digest},
                     {"mode", mode_of(cfg, options)},
                     {"config", config_json(cfg)},
                     {"methods", methods},
                     {"num_seeds", cfg.num_seeds},
                     {"notes",
                      {"one truth graph and one dataset are shared by every method within a seed",
                       "low-mass filtering is applied to the true and the learned modes"}}};
    if (options.external_posterior) manifest["external_posterior"] = options.external_posterior->string();
    write_file_atomic(manifest_path, manifest.dump(2) + "\n");

    RunLog log(root / kRunLogFile);
    log.write({{"event", "run_start"},
               {"digest", digest},
               {"through", to_string(options.through)},
               {"workers", cfg.workers}});
    const auto t0 = std::chrono::steady_clock::now();

    const auto seeds = static_cast<std::size_t>(cfg.num_seeds);
    const bool parallel_seeds = cfg.workers > 1 && seeds >= cfg.workers;
    const unsigned outer = parallel_seeds ? cfg.workers : 1;
    const unsigned inner = parallel_seeds ? 1 : cfg.workers;
    std::vector<std::vector<SeedFailure>> per_seed(seeds);
    parallel_for(seeds, outer, [&](std::size_t s) {
        SeedRunner runner(cfg, options, methods, digest, ingested ? &*ingested : nullptr, log, static_cast<int>(s),
                          inner);
        per_seed[s] = runner.run();
    });

    std::vector<SeedFailure> failures;
    for (auto& f : per_seed) failures.insert(failures.end(), f.begin(), f.end());
    const double elapsed = seconds_since(t0);
    log.write({{"event", "run_end"}, {"seconds", elapsed}, {"failures", failures.size()}});

    manifest["seeds"] = stage_status(root, cfg.num_seeds, methods);
    manifest["timings"] = {{"last_run_seconds", elapsed}, {"workers", cfg.workers}};
    json failed = json::array();
    for (const auto& f : failures) failed.push_back({{"seed", f.seed_index}, {"method", f.method}, {"message", f.message}});
    manifest["failures"] = std::move(failed);
    write_file_atomic(manifest_path, manifest.dump(2) + "\n");
    return failures;
}

RunReport build_report(const fs::path& root) {
    const fs::path manifest_path = root / kRunManifestFile;
    if (!fs::exists(manifest_path)) throw AggregationError("no run manifest under " + root.string());
    const auto manifest = json::parse(read_file(manifest_path));
    RunReport report;
    report.config_digest = manifest.at("config_digest").get<std::string>();
    const int seeds = manifest.at("num_seeds").get<int>();

    for (int s = 0; s < seeds; ++s)
        if (!fs::exists(root / seed_directory(s) / "generate.done"))
            report.failures.push_back({s, "", "truth generation did not complete"});

    for (const auto& method : manifest.at("methods").get<std::vector<std::string>>()) {
        std::vector<SeedReports> collected;
        for (int s = 0; s < seeds; ++s) {
            const fs::path dir = root / seed_directory(s) / method;
            if (!fs::exists(dir / "evaluate.done")) {
                if (!fs::exists(root / seed_directory(s) / "generate.done")) continue;
                std::string why = "evaluation did not complete";
                if (fs::exists(dir / "error.txt")) why = trim(read_file(dir / "error.txt"));
                report.failures.push_back({s, method, why});
                continue;
            }
            auto file = read_pair_reports(dir / "pairs.csv");
            if (file.digest != report.config_digest)
                throw AggregationError((dir / "pairs.csv").string() + " has digest " + file.digest + ", expected " +
                                       report.config_digest);
            collected.push_back({s, std::move(file.pairs)});
        }
        if (!collected.empty()) report.methods.push_back(aggregate(method, collected));
    }
    write_file_atomic(root / kReportFile, format_report_csv(report));
    write_file_atomic(root / kRelaxationFile, format_relaxation_csv(report));
    return report;
}

RunReport run_synthetic(const ExperimentConfig& cfg) {
    if (cfg.real_data()) throw ConfigError("run_synthetic called with a dataset_path");
    run_stages(cfg);
    return build_report(cfg.output_root);
}

RunReport run_real(const ExperimentConfig& cfg) {
    if (!cfg.real_data()) throw ConfigError("run_real needs dataset_path and graph_path");
    run_stages(cfg);
    return build_report(cfg.output_root);
}

RunReport evaluate_external(const fs::path& posterior_path, const ExperimentConfig& cfg) {
    RunOptions options;
    options.external_posterior = posterior_path;
    run_stages(cfg, options);
    return build_report(cfg.output_root);
}

}  // namespace atebench
