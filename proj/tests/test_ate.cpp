#include <gtest/gtest.h>

#include <filesystem>

#include "atebench/ate.hpp"
#include "atebench/errors.hpp"
#include "atebench/mec.hpp"
#include "atebench/random.hpp"
#include "atebench/scm.hpp"
#include "atebench/text.hpp"
#include "oracles.hpp"

using namespace atebench;
namespace fs = std::filesystem;

namespace {

LinearGaussianScm scm_with(int d, std::initializer_list<std::tuple<int, int, double>> edges) {
    BoolMatrix m(d);
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(d, d);
    for (auto [a, b, v] : edges) {
        m.set(a, b);
        w(a, b) = v;
    }
    return LinearGaussianScm(Dag(NodeLabels::numbered(d), m), w, Eigen::VectorXd::Ones(d));
}

AteQuery query(int t, int y) {
    AteQuery q;
    q.treatment = t;
    q.outcome = y;
    return q;
}

// Slope of x_t in the OLS of x_y on [1, x_t, x_parents(t)], by explicit QR.
double ols_oracle(const Dag& g, const Dataset& data, int t, int y) {
    const auto pa = parents(g, t);
    Eigen::MatrixXd z(data.rows(), pa.size() + 2);
    z.col(0).setOnes();
    z.col(1) = data.values.col(t);
    for (std::size_t c = 0; c < pa.size(); ++c) z.col(c + 2) = data.values.col(pa[c]);
    return z.colPivHouseholderQr().solve(data.values.col(y))(1);
}

}  // namespace

TEST(Backdoor, ParentsOfTreatment) {
    // C=0, T=1, Y=2
    const auto confounded = scm_with(3, {{0, 1, 1.0}, {0, 2, 1.0}, {1, 2, 1.0}}).graph();
    EXPECT_EQ(backdoor_adjustment_set(confounded, query(1, 2)), (NodeSet{0}));
    EXPECT_EQ(backdoor_adjustment_set(confounded, query(0, 2)), NodeSet{});
    const auto chain = scm_with(3, {{0, 1, 1.0}, {1, 2, 1.0}}).graph();
    EXPECT_EQ(backdoor_adjustment_set(chain, query(0, 2)), NodeSet{});
}

TEST(EstimateAte, SingleEdgeRecoversWeight) {
    const auto scm = scm_with(2, {{0, 1, 1.5}});
    const auto data = sample(scm, 100000, 1);
    EXPECT_NEAR(estimate_ate(scm.graph(), data, query(0, 1)), 1.5, 0.02);
}

TEST(EstimateAte, NonDescendantIsExactlyZero) {
    const auto scm = scm_with(3, {{0, 1, 1.5}, {2, 1, -0.7}});
    const auto data = sample(scm, 500, 2);
    EXPECT_EQ(estimate_ate(scm.graph(), data, query(1, 0)), 0.0);
    EXPECT_EQ(estimate_ate(scm.graph(), data, query(0, 2)), 0.0);
    EXPECT_EQ(estimate_ate(scm.graph(), data, query(2, 0)), 0.0);
}

TEST(EstimateAte, ConfoundedMatchesAnalytic) {
    const auto scm = scm_with(3, {{0, 1, 1.2}, {0, 2, -0.8}, {1, 2, 0.9}});
    const auto data = sample(scm, 100000, 3);
    EXPECT_NEAR(estimate_ate(scm.graph(), data, query(1, 2)), analytic_total_effect(scm, 1, 2), 0.02);
    EXPECT_NEAR(estimate_ate(scm.graph(), data, query(0, 2)), analytic_total_effect(scm, 0, 2), 0.02);
}

TEST(EstimateAte, LinearInContrast) {
    const auto scm = random_scm(random_er_dag(6, 8, 4), {}, 5);
    const auto data = sample(scm, 400, 6);
    for (int t = 0; t < 6; ++t)
        for (int y = 0; y < 6; ++y) {
            if (t == y) continue;
            auto q2 = query(t, y);
            q2.treatment_value_b = 2.0;
            EXPECT_DOUBLE_EQ(estimate_ate(scm.graph(), data, q2), 2.0 * estimate_ate(scm.graph(), data, query(t, y)));
            auto shifted = q2;
            shifted.reference_value_a = 1.0;
            shifted.treatment_value_b = 3.0;
            EXPECT_DOUBLE_EQ(estimate_ate(scm.graph(), data, shifted), estimate_ate(scm.graph(), data, q2));
        }
}

TEST(EstimateAte, MatchesExplicitRegression) {
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto scm = random_scm(random_er_dag(7, 10, 10 + s), {}, 20 + s);
        const auto data = sample(scm, 300, 30 + s);
        const GramCache gram(data);
        const auto reach = reachability(scm.graph());
        for (int t = 0; t < 7; ++t)
            for (int y = 0; y < 7; ++y) {
                if (t == y) continue;
                const auto est = estimate_ate(scm.graph(), gram, query(t, y));
                EXPECT_FALSE(est.ridge_fallback);
                if (!reach(t, y)) {
                    EXPECT_EQ(est.value, 0.0);
                    continue;
                }
                const double expected = ols_oracle(scm.graph(), data, t, y);
                EXPECT_NEAR(est.value, expected, 1e-9 * (1 + std::abs(expected)));
            }
    }
}

TEST(EstimateAte, RidgeFallbackOnCollinearDesign) {
    const auto scm = scm_with(3, {{2, 0, 1.0}, {0, 1, 1.0}});
    auto data = sample(scm, 200, 7);
    data.values.col(2) = data.values.col(0);
    const auto est = estimate_ate(scm.graph(), GramCache(data), query(0, 1));
    EXPECT_TRUE(est.ridge_fallback);
    EXPECT_TRUE(std::isfinite(est.value));
}

TEST(EstimateAte, Errors) {
    const auto scm = scm_with(3, {{0, 1, 1.0}, {2, 0, 1.0}});
    const auto data = sample(scm, 2, 8);
    EXPECT_THROW(estimate_ate(scm.graph(), data, query(0, 1)), SampleSizeError);
    EXPECT_THROW(estimate_ate(scm.graph(), data, query(1, 1)), ParameterError);
    EXPECT_THROW(estimate_ate(scm.graph(), data, query(0, 5)), ParameterError);
}

TEST(Sweep, PairCountsAndIndexing) {
    EXPECT_EQ(pair_index(3, 0, 1), 0u);
    EXPECT_EQ(pair_index(3, 0, 2), 1u);
    EXPECT_EQ(pair_index(3, 1, 0), 2u);
    EXPECT_EQ(pair_index(3, 2, 1), 5u);

    const auto truth = random_er_dag(11, 15, 9);
    const auto data = sample(random_scm(truth, {}, 10), 200, 11);
    const std::vector<Dag> one{truth};
    const std::vector<double> w{1.0};
    const auto s = sweep(one, w, "single", data);
    EXPECT_EQ(s.sets.size(), 110u);
    EXPECT_EQ(s.num_dags(), 1u);
    for (const auto& set : s.sets) EXPECT_EQ(set.values.size(), 1u);
    for (int t = 0; t < 11; ++t)
        for (int y = 0; y < 11; ++y)
            if (t != y) {
                EXPECT_EQ(s.at(t, y).query.treatment, t);
                EXPECT_EQ(s.at(t, y).query.outcome, y);
            }
}

TEST(Sweep, WorkerCountDoesNotChangeOutput) {
    const auto truth = random_er_dag(8, 10, 12);
    const auto data = sample(random_scm(truth, {}, 13), 300, 14);
    const auto mec = enumerate_mec(truth);
    const auto serial = sweep(mec, data);
    SweepOptions opts;
    opts.workers = 4;
    const auto parallel = sweep(mec, data, opts);
    EXPECT_EQ(serial.source_tag, kTrueMecTag);
    ASSERT_EQ(serial.sets.size(), parallel.sets.size());
    for (std::size_t i = 0; i < serial.sets.size(); ++i) {
        EXPECT_EQ(serial.sets[i].values, parallel.sets[i].values);
        EXPECT_EQ(serial.sets[i].weights, parallel.sets[i].weights);
    }
    EXPECT_EQ(format_ate_samples(serial, "d"), format_ate_samples(parallel, "d"));
}

TEST(Sweep, LabelMismatchIsSchemaError) {
    const auto truth = random_er_dag(4, 3, 15);
    const auto data = sample(random_scm(truth, {}, 16), 50, 17);
    const auto other = Dag::empty(NodeLabels({"a", "b", "c", "d"}));
    const std::vector<Dag> bag{other};
    const std::vector<double> w{1.0};
    EXPECT_THROW(sweep(bag, w, "x", data), SchemaError);
}

TEST(Sweep, TrueMecWeightsAreUniform) {
    const auto truth = scm_with(3, {{0, 1, 1.0}, {1, 2, 1.0}}).graph();
    const auto data = sample(random_scm(truth, {}, 18), 100, 19);
    const auto s = sweep(enumerate_mec(truth), data);
    EXPECT_EQ(s.num_dags(), 3u);
    for (double w : s.sets[0].weights) EXPECT_DOUBLE_EQ(w, 1.0 / 3);
}

TEST(AteSamplesFile, RoundTrip) {
    const auto truth = random_er_dag(5, 5, 20);
    const auto data = sample(random_scm(truth, {}, 21), 100, 22);
    SweepOptions opts;
    opts.treatment_value_b = 2.5;
    opts.reference_value_a = -1.0;
    const auto s = sweep(enumerate_mec(truth), data, opts);
    const auto path = fs::temp_directory_path() / "atebench_ate_roundtrip.csv";
    write_ate_samples(path, s, "abc123");
    const auto back = read_ate_samples(path);
    EXPECT_EQ(back.digest, "abc123");
    EXPECT_EQ(back.sweep.source_tag, s.source_tag);
    EXPECT_EQ(back.sweep.labels, s.labels);
    ASSERT_EQ(back.sweep.sets.size(), s.sets.size());
    for (std::size_t i = 0; i < s.sets.size(); ++i) {
        EXPECT_EQ(back.sweep.sets[i].values, s.sets[i].values);
        EXPECT_EQ(back.sweep.sets[i].weights, s.sets[i].weights);
        EXPECT_EQ(back.sweep.sets[i].query.treatment_value_b, 2.5);
        EXPECT_EQ(back.sweep.sets[i].query.reference_value_a, -1.0);
    }
    EXPECT_EQ(format_ate_samples(back.sweep, "abc123"), read_file(path));
}
