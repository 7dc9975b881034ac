#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>

#include "atebench/config.hpp"
#include "atebench/errors.hpp"
#include "atebench/graph_io.hpp"
#include "atebench/mec.hpp"
#include "atebench/pipeline.hpp"
#include "atebench/posterior.hpp"
#include "atebench/scm.hpp"
#include "atebench/text.hpp"

using namespace atebench;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("atebench_pipeline_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

ExperimentConfig small_config(const fs::path& root) {
    ExperimentConfig cfg;
    cfg.d = 5;
    cfg.n = 100;
    cfg.num_seeds = 3;
    cfg.posterior_size = 100;
    cfg.methods = {kMethodBootstrapPc};
    cfg.output_root = root;
    cfg.master_seed = 7;
    return cfg;
}

// Real-data fixture: a 4-node graph, its data and a config pointing at both.
ExperimentConfig real_config(const fs::path& dir) {
    const NodeLabels labels({"a", "b", "c", "e"});
    const Dag truth(labels, BoolMatrix::from_rows({{0, 1, 1, 0}, {0, 0, 0, 1}, {0, 0, 0, 1}, {0, 0, 0, 0}}));
    write_dag(dir / "truth.graph", truth);
    write_dataset_csv(dir / "data.csv", sample(random_scm(truth, {}, 1), 150, 2));
    ExperimentConfig cfg;
    cfg.dataset_path = dir / "data.csv";
    cfg.graph_path = dir / "truth.graph";
    cfg.num_seeds = 1;
    cfg.output_root = dir / "run";
    return cfg;
}

std::vector<fs::path> files_under(const fs::path& root) {
    std::vector<fs::path> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(ATE_BENCH_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, ParsesKeysCommentsAndAuto) {
    const auto cfg = parse_config(
        "# experiment\n"
        "d = 12\n"
        "n=50\n"
        "methods = bootstrap-ges, structure-mcmc\n"
        "mcmc_thin = auto\n"
        "filter_grid = 0, 0.05\n"
        "standardize = true\n");
    EXPECT_EQ(cfg.synthetic_d(), 12);
    EXPECT_EQ(cfg.synthetic_n(), 50);
    EXPECT_EQ(cfg.methods, (std::vector<std::string>{kMethodBootstrapGes, kMethodStructureMcmc}));
    EXPECT_FALSE(cfg.mcmc_thin);
    EXPECT_EQ(cfg.filter_grid, (std::vector<double>{0.0, 0.05}));
    EXPECT_TRUE(cfg.standardize);
    EXPECT_EQ(cfg.mcmc(0).thin, (500000 - 100000) / 1000);
    EXPECT_EQ(cfg.ci_test(12).max_condition_size, 3);
    EXPECT_EQ(cfg.ci_test(11).max_condition_size, -1);
}

TEST(Config, RejectsMalformedInput) {
    EXPECT_THROW(parse_config("bogus = 1\n"), ConfigError);
    EXPECT_THROW(parse_config("d = 3\nd = 4\n"), ConfigError);
    EXPECT_THROW(parse_config("d = three\n"), ConfigError);
    EXPECT_THROW(parse_config("no equals sign\n"), ConfigError);
    EXPECT_THROW(validate(parse_config("methods = magic\n")), ConfigError);
    EXPECT_THROW(validate(parse_config("d = 65\n")), ConfigError);
    EXPECT_THROW(validate(parse_config("filter_grid = 1.0\n")), ConfigError);
    EXPECT_THROW(validate(parse_config("mcmc_steps = 10\nmcmc_burn_in = 20\n")), ConfigError);
}

TEST(Config, FormatRoundTripsAndDigestIgnoresPlacement) {
    auto cfg = parse_config("d = 7\nci_alpha = 0.01\nmaster_seed = 99\n");
    EXPECT_EQ(format_config(parse_config(format_config(cfg))), format_config(cfg));
    const auto digest = config_digest(cfg);
    auto moved = cfg;
    moved.workers = 8;
    moved.output_root = "/elsewhere";
    EXPECT_EQ(config_digest(moved), digest);
    auto changed = cfg;
    changed.master_seed = 100;
    EXPECT_NE(config_digest(changed), digest);
    changed = cfg;
    changed.regroup.rtol = 1e-4;
    EXPECT_NE(config_digest(changed), digest);
}

TEST(Pipeline, SyntheticRunWritesEveryArtifact) {
    const auto root = scratch("synthetic");
    const auto report = run_synthetic(small_config(root));
    EXPECT_TRUE(report.failures.empty());
    ASSERT_EQ(report.methods.size(), 1u);
    EXPECT_EQ(report.methods[0].method, kMethodBootstrapPc);
    EXPECT_EQ(report.methods[0].seeds, 3);
    EXPECT_EQ(report.methods[0].spread, Spread::standard_error);
    for (int s = 0; s < 3; ++s) {
        const auto dir = root / seed_directory(s);
        for (const char* f : {"truth.graph", "data.csv", "generate.done", "true/ate.csv", "true/histogram.csv",
                              "bootstrap-pc/posterior.graphs", "bootstrap-pc/diagnostics.csv", "bootstrap-pc/ate.csv",
                              "bootstrap-pc/pairs.csv", "bootstrap-pc/evaluate.done"})
            EXPECT_TRUE(fs::exists(dir / f)) << dir / f;
        const auto pairs = read_pair_reports(dir / "bootstrap-pc" / "pairs.csv");
        EXPECT_EQ(pairs.pairs.size(), 20u);
        EXPECT_EQ(pairs.digest, report.config_digest);
        EXPECT_EQ(read_ate_samples(dir / "bootstrap-pc" / "ate.csv").sweep.num_dags(), 100u);
    }
    for (const char* f : {kReportFile, kRelaxationFile, kRunManifestFile, kRunLogFile})
        EXPECT_TRUE(fs::exists(root / f)) << f;
    EXPECT_NE(read_file(root / kReportFile).find("# digest=" + report.config_digest), std::string::npos);
}

TEST(Pipeline, ResumeRecomputesOnlyMissingStages) {
    const auto root = scratch("resume");
    const auto cfg = small_config(root);
    run_synthetic(cfg);
    const auto report = read_file(root / kReportFile);
    const auto relaxation = read_file(root / kRelaxationFile);

    std::map<fs::path, fs::file_time_type> stamps;
    for (const auto& f : files_under(root)) stamps[f] = fs::last_write_time(f);
    const auto seed1 = root / seed_directory(1);
    fs::remove(seed1 / "bootstrap-pc" / "discover.done");

    run_synthetic(cfg);
    EXPECT_EQ(read_file(root / kReportFile), report);
    EXPECT_EQ(read_file(root / kRelaxationFile), relaxation);
    for (const auto& [f, t] : stamps) {
        const bool redone = f.parent_path() == seed1 / "bootstrap-pc";
        const bool run_level = f.parent_path() == root;
        if (!redone && !run_level) EXPECT_EQ(fs::last_write_time(f), t) << f;
    }
    EXPECT_TRUE(fs::exists(seed1 / "bootstrap-pc" / "discover.done"));
}

TEST(Pipeline, StagesCanRunOneAtATime) {
    const auto root = scratch("staged");
    const auto cfg = small_config(root);
    for (Stage s : {Stage::generate, Stage::discover, Stage::ate_sweep, Stage::evaluate}) {
        RunOptions options;
        options.through = s;
        EXPECT_TRUE(run_stages(cfg, options).empty()) << to_string(s);
    }
    const auto staged = build_report(root);
    const auto direct_root = scratch("staged_direct");
    const auto direct = run_synthetic(small_config(direct_root));
    EXPECT_EQ(read_file(root / kReportFile), read_file(direct_root / kReportFile));
    EXPECT_EQ(staged.config_digest, direct.config_digest);
}

TEST(Pipeline, OutputRootRefusesDifferentConfig) {
    const auto root = scratch("conflict");
    auto cfg = small_config(root);
    cfg.num_seeds = 1;
    run_synthetic(cfg);
    auto other = cfg;
    other.master_seed = 8;
    EXPECT_THROW(run_synthetic(other), ConfigError);
    auto relocated = cfg;
    relocated.workers = 2;
    EXPECT_NO_THROW(run_synthetic(relocated));
}

TEST(Pipeline, TamperedPairDigestIsRefused) {
    const auto root = scratch("tamper");
    auto cfg = small_config(root);
    cfg.num_seeds = 2;
    const auto report = run_synthetic(cfg);
    const auto pairs = root / seed_directory(1) / "bootstrap-pc" / "pairs.csv";
    auto text = read_file(pairs);
    const auto at = text.find(report.config_digest);
    ASSERT_NE(at, std::string::npos);
    text.replace(at, report.config_digest.size(), std::string(report.config_digest.size(), '0'));
    write_file_atomic(pairs, text);
    EXPECT_THROW(build_report(root), AggregationError);
}

TEST(Pipeline, FailingSeedsAreIsolated) {
    const auto root = scratch("isolation");
    auto cfg = small_config(root);
    cfg.num_seeds = 6;
    cfg.mec_cap = 1;
    cfg.er_expected_edges = 1.0;
    const auto failures = run_stages(cfg);
    int failed = 0, finished = 0;
    for (int s = 0; s < cfg.num_seeds; ++s) {
        const auto dir = root / seed_directory(s);
        const bool done = fs::exists(dir / "bootstrap-pc" / "evaluate.done");
        finished += done;
        failed += !done;
    }
    EXPECT_EQ(static_cast<int>(failures.size()), failed);
    EXPECT_GT(failed, 0);
    EXPECT_GT(finished, 0);
    for (const auto& f : failures) EXPECT_FALSE(f.message.empty());
    const auto report = build_report(root);
    EXPECT_EQ(report.methods[0].seeds, finished);
    EXPECT_EQ(static_cast<int>(report.failures.size()), failed);
}

TEST(Pipeline, RealDataRun) {
    const auto dir = scratch("real");
    auto cfg = real_config(dir);
    cfg.posterior_size = 20;
    cfg.methods = {kMethodBootstrapPc, kMethodBootstrapGes};
    const auto report = run_real(cfg);
    ASSERT_EQ(report.methods.size(), 2u);
    for (const auto& m : report.methods) {
        EXPECT_EQ(m.seeds, 1);
        EXPECT_EQ(m.spread, Spread::standard_deviation);
    }
    EXPECT_EQ(read_pair_reports(cfg.output_root / seed_directory(0) / "bootstrap-ges" / "pairs.csv").pairs.size(), 12u);
}

TEST(Pipeline, RealDataRejectsBadInputs) {
    const auto dir = scratch("real_bad");
    auto cfg = real_config(dir);
    write_file_atomic(dir / "cyclic.graph", "nodes: a,b,c,e\na -> b\nb -> e\ne -> a\n");
    auto cyclic = cfg;
    cyclic.graph_path = dir / "cyclic.graph";
    EXPECT_THROW(run_real(cyclic), ValidationError);

    write_file_atomic(dir / "extra.graph", "nodes: a,b,c,e,z\na -> b\n");
    auto missing = cfg;
    missing.graph_path = dir / "extra.graph";
    try {
        run_real(missing);
        FAIL() << "expected SchemaError";
    } catch (const SchemaError& e) {
        EXPECT_NE(std::string(e.what()).find("'z'"), std::string::npos) << e.what();
    }
    EXPECT_FALSE(fs::exists(missing.output_root / seed_directory(0) / "true" / "ate.csv"));
}

TEST(Pipeline, ExternalPosteriorWithOneWrongDag) {
    const auto dir = scratch("external");
    auto cfg = real_config(dir);
    const auto truth = read_dag(dir / "truth.graph");
    auto members = enumerate_mec(truth).members;
    const std::size_t mec_size = members.size();
    members.push_back(Dag::empty(truth.labels()));
    write_dag_directory(dir / "posterior", members,
                        std::vector<double>(members.size(), 1.0 / static_cast<double>(members.size())));
    const auto report = evaluate_external(dir / "posterior", cfg);
    ASSERT_EQ(report.methods.size(), 1u);
    EXPECT_EQ(report.methods[0].method, kMethodExternal);
    const auto pairs = read_pair_reports(cfg.output_root / seed_directory(0) / kMethodExternal / "pairs.csv").pairs;
    ASSERT_EQ(pairs.size(), 12u);
    bool any_wd = false;
    for (const auto& p : pairs) {
        const auto& c = p.unfiltered.counts;
        EXPECT_EQ(c.tp + c.fn, c.true_modes);
        EXPECT_LE(c.fp, c.learned_modes);
        EXPECT_EQ(*p.unfiltered.recall, 1.0);
        any_wd = any_wd || p.wd > 0;
    }
    EXPECT_TRUE(any_wd);
    EXPECT_GT(mec_size, 1u);

    EXPECT_THROW(evaluate_external(scratch("external_empty"), cfg), ValidationError);
    const auto wrong = scratch("external_labels");
    write_dag(wrong / "g.graph", Dag::empty(NodeLabels({"a", "b", "c", "x"})));
    auto fresh = cfg;
    fresh.output_root = dir / "run_wrong";
    EXPECT_THROW(evaluate_external(wrong, fresh), SchemaError);
}

TEST(Cli, RunAndReport) {
    const auto root = scratch("cli");
    const std::string flags = "--d 4 --n 60 --num_seeds 2 --posterior_size 10 --methods bootstrap-pc --master_seed 3";
    EXPECT_EQ(run_cli("run " + flags + " --output_root " + (root / "a").string()), 0);
    EXPECT_TRUE(fs::exists(root / "a" / kReportFile));
    EXPECT_EQ(run_cli("report --output_root " + (root / "a").string()), 0);

    write_file_atomic(root / "exp.cfg", "d = 4\nn = 60\nnum_seeds = 2\nposterior_size = 10\nmethods = bootstrap-pc\n"
                                        "master_seed = 3\noutput_root = " + (root / "from_file").string() + "\n");
    ::setenv("ATE_BENCH_OUTPUT_ROOT", (root / "from_env").c_str(), 1);
    EXPECT_EQ(run_cli("run --config " + (root / "exp.cfg").string()), 0);
    ::unsetenv("ATE_BENCH_OUTPUT_ROOT");
    EXPECT_TRUE(fs::exists(root / "from_env" / kReportFile));
    EXPECT_FALSE(fs::exists(root / "from_file"));
    EXPECT_EQ(read_file(root / "from_env" / kReportFile), read_file(root / "a" / kReportFile));

    EXPECT_EQ(run_cli("generate --config " + (root / "exp.cfg").string()), 0);
    EXPECT_TRUE(fs::exists(root / "from_file" / seed_directory(0) / "generate.done"));
    EXPECT_FALSE(fs::exists(root / "from_file" / seed_directory(0) / "bootstrap-pc"));
    EXPECT_NE(run_cli("run --bogus 1"), 0);
    EXPECT_NE(run_cli("run --d 0 --output_root " + (root / "bad").string()), 0);
}
