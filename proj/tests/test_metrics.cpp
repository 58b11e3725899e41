#include "nbgraph/errors.hpp"
#include "nbgraph/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

using namespace nbgraph;

namespace {

// Conditional entropy H(A|B) from raw label pairs, in nats.
double conditional_entropy(const std::vector<int>& a, const std::vector<int>& b) {
    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> mb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        joint[{a[i], b[i]}] += 1.0;
        mb[b[i]] += 1.0;
    }
    const double n = static_cast<double>(a.size());
    double h = 0.0;
    for (const auto& [key, count] : joint) {
        h -= count / n * std::log(count / mb[key.second]);
    }
    return h;
}

double entropy(const std::vector<int>& a) {
    return conditional_entropy(a, std::vector<int>(a.size(), 0));
}

std::vector<int> random_labels(std::mt19937_64& rng, std::size_t n, int classes) {
    std::uniform_int_distribution<int> pick(0, classes - 1);
    std::vector<int> out(n);
    for (int& v : out) {
        v = pick(rng);
    }
    return out;
}

} // namespace

TEST(Metrics, SingleClusterHasZeroHomogeneity) {
    const std::vector<int> truth{0, 0, 1, 1, 2};
    const std::vector<int> one(5, 0);
    const auto hc = homogeneity_completeness(truth, one);
    EXPECT_EQ(hc.homogeneity, 0.0);
    EXPECT_EQ(hc.completeness, 1.0);
    EXPECT_EQ(v_measure(truth, one), 0.0);
}

TEST(Metrics, SingletonClustersArePerfectlyHomogeneous) {
    const std::vector<int> truth{0, 0, 1, 1};
    const std::vector<int> each{0, 1, 2, 3};
    const auto hc = homogeneity_completeness(truth, each);
    EXPECT_EQ(hc.homogeneity, 1.0);
    // H(K|C) = ln 2, H(K) = ln 4: completeness is 1/2, not 0.
    EXPECT_NEAR(hc.completeness, 0.5, 1e-15);
}

TEST(Metrics, TwoByTwoTableMatchesHandEntropy) {
    const std::vector<int> truth{0, 0, 1, 1};
    const std::vector<int> pred{0, 1, 1, 0};
    const auto hc = homogeneity_completeness(truth, pred);
    // Independent labels: H(C|K) = H(C) = ln 2.
    EXPECT_NEAR(hc.homogeneity, 0.0, 1e-15);
    EXPECT_NEAR(hc.completeness, 0.0, 1e-15);
    EXPECT_EQ(v_measure(truth, pred), 0.0);
}

TEST(Metrics, PerfectRelabelingGivesOne) {
    const std::vector<int> truth{0, 0, 1, 1, 2, 2};
    const std::vector<int> pred{5, 5, 3, 3, 9, 9};
    EXPECT_EQ(v_measure(truth, pred), 1.0);
    const ClusterScores s = score_clustering(truth, pred, 2.0);
    EXPECT_EQ(s.homogeneity, 1.0);
    EXPECT_EQ(s.completeness, 1.0);
    EXPECT_EQ(s.v_measure, 1.0);
}

TEST(Metrics, FormulaExample) {
    EXPECT_NEAR(v_measure(0.5, 1.0, 1.0), 2.0 * 0.5 / 1.5, 1e-15);
    EXPECT_EQ(v_measure(0.0, 0.0, 1.0), 0.0);
    EXPECT_EQ(v_measure(0.0, 1.0, 1.0), 0.0);
    EXPECT_THROW(v_measure(0.5, 0.5, -1.0), ParameterError);
}

TEST(Metrics, BetaMovesTowardCompleteness) {
    const double h = 0.8;
    const double c = 0.3;
    const double v0 = v_measure(h, c, 0.0);
    const double v1 = v_measure(h, c, 1.0);
    const double v9 = v_measure(h, c, 9.0);
    EXPECT_NEAR(v0, h, 1e-15);
    EXPECT_GT(v0, v1);
    EXPECT_GT(v1, v9);
    EXPECT_GT(v9, c);
}

TEST(Metrics, LengthMismatchAndEmpty) {
    const std::vector<int> a{0, 1};
    const std::vector<int> b{0};
    EXPECT_THROW(homogeneity_completeness(a, b), ParameterError);
    EXPECT_THROW(v_measure(std::vector<int>{}, std::vector<int>{}), ParameterError);
}

TEST(Metrics, ContingencyMarginals) {
    const std::vector<int> truth{0, 0, 1, 2, 2, 2};
    const std::vector<int> pred{1, 1, 1, 0, 0, 1};
    const ContingencyTable t = ContingencyTable::build(truth, pred);
    EXPECT_EQ(t.total, 6u);
    std::size_t sum = 0;
    for (const auto& row : t.counts) {
        for (std::size_t c : row) {
            sum += c;
        }
    }
    EXPECT_EQ(sum, 6u);
    EXPECT_EQ(t.class_totals, (std::vector<std::size_t>{2, 1, 3}));
    // Cluster columns follow first appearance in the prediction.
    EXPECT_EQ(t.cluster_totals, (std::vector<std::size_t>{4, 2}));
}

TEST(Metrics, EntropyOracleAndBounds) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + rng() % 200;
        const auto truth = random_labels(rng, n, 1 + static_cast<int>(rng() % 6));
        const auto pred = random_labels(rng, n, 1 + static_cast<int>(rng() % 6));
        const double hc_ = entropy(truth);
        const double hk = entropy(pred);
        const double h = hc_ == 0.0 ? 1.0 : 1.0 - conditional_entropy(truth, pred) / hc_;
        const double c = hk == 0.0 ? 1.0 : 1.0 - conditional_entropy(pred, truth) / hk;
        const auto got = homogeneity_completeness(truth, pred);
        ASSERT_NEAR(got.homogeneity, h, 1e-12);
        ASSERT_NEAR(got.completeness, c, 1e-12);
        const double v = v_measure(truth, pred);
        for (double x : {got.homogeneity, got.completeness, v}) {
            ASSERT_GE(x, 0.0);
            ASSERT_LE(x, 1.0);
        }
        // Symmetric under swapping truth and prediction at beta 1.
        ASSERT_NEAR(v_measure(pred, truth), v, 1e-12);
    }
}
