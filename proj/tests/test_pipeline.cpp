#include "nbgraph/pipeline.hpp"
#include "nbgraph/synthetic.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

using namespace nbgraph;

namespace {

const VectorDataset& blobs() {
    static const VectorDataset data = make_blobs({});
    return data;
}

ExperimentConfig config(Method method, std::size_t k, std::size_t repeats = 1) {
    ExperimentConfig c;
    c.method = method;
    c.k = k;
    c.repeats = repeats;
    c.seed = 2024;
    c.with_stats = false;
    return c;
}

} // namespace

TEST(Config, Validation) {
    ExperimentConfig c = config(Method::inc_knn, 2);
    EXPECT_NO_THROW(c.validate());
    c.epsilon = 0.5;
    EXPECT_THROW(c.validate(), ParameterError);
    c = config(Method::epsilon, 2);
    EXPECT_THROW(c.validate(), ParameterError);
    c.k.reset();
    c.epsilon = 0.5;
    EXPECT_NO_THROW(c.validate());
    c = config(Method::inc_knn, 2, 0);
    EXPECT_THROW(c.validate(), ParameterError);
    c = config(Method::inc_knn, 2);
    c.affinity = AffinityKind::gaussian;
    EXPECT_THROW(c.validate(), ParameterError);
    c.t = 1.0;
    EXPECT_NO_THROW(c.validate());
    EXPECT_THROW(parse_method("mst"), ParameterError);
    EXPECT_EQ(parse_method(to_string(Method::inc_knn_mst)), Method::inc_knn_mst);
}

TEST(Pipeline, IncrementalBlobsAreStable) {
    const RunReport r = run_experiment(config(Method::inc_knn, 2, 10), blobs());
    EXPECT_EQ(r.runs.size(), 10u);
    EXPECT_EQ(r.disconnected_runs, 0u);
    EXPECT_GE(r.v_measure.mean, 0.95);
    ASSERT_TRUE(r.v_measure.stddev.has_value());
    EXPECT_LE(*r.v_measure.stddev, 0.02);
    for (const RunRecord& run : r.runs) {
        EXPECT_FALSE(run.disconnected);
        EXPECT_EQ(run.components.num_components, 1u);
        ASSERT_TRUE(run.scores.has_value());
        EXPECT_GE(run.scores->v_measure, 0.0);
        EXPECT_LE(run.scores->v_measure, 1.0);
    }
}

TEST(Pipeline, StandardKnnAtOneFragments) {
    const RunReport r = run_experiment(config(Method::knn, 1, 2), blobs());
    EXPECT_EQ(r.disconnected_runs, 2u);
    for (const RunRecord& run : r.runs) {
        EXPECT_GT(run.components.num_components, 3u);
        EXPECT_TRUE(run.diagnostic.has_value());
    }
    ExperimentConfig skip = config(Method::knn, 1);
    skip.disconnected = DisconnectedPolicy::skip;
    const RunReport s = run_experiment(skip, blobs());
    EXPECT_EQ(s.scored_runs, 0u);
    EXPECT_FALSE(s.runs[0].scores.has_value());
}

TEST(Pipeline, StdPresentOnlyWithRepeats) {
    const RunReport one = run_experiment(config(Method::inc_knn, 3), blobs());
    EXPECT_FALSE(one.v_measure.stddev.has_value());
    EXPECT_EQ(nlohmann::json::parse(to_json(one))["v_measure"].count("std"), 0u);
}

TEST(Pipeline, ReportsAreByteIdentical) {
    ExperimentConfig c = config(Method::inc_knn, 2, 3);
    c.with_stats = true;
    EXPECT_EQ(to_json(run_experiment(c, blobs())), to_json(run_experiment(c, blobs())));
    c.assigner = Assigner::kmeans;
    EXPECT_EQ(to_json(run_experiment(c, blobs())), to_json(run_experiment(c, blobs())));
}

TEST(Pipeline, OtherMethodsRun) {
    for (Method m : {Method::inc_knn_mst, Method::knn_mst}) {
        const RunReport r = run_experiment(config(m, 1), blobs());
        EXPECT_EQ(r.disconnected_runs, 0u);
        EXPECT_GT(r.v_measure.mean, 0.5);
    }
    ExperimentConfig e = config(Method::epsilon, 1);
    e.k.reset();
    e.epsilon = 1.0;
    EXPECT_NO_THROW(run_experiment(e, blobs()));
    ExperimentConfig g = config(Method::inc_knn, 5);
    g.affinity = AffinityKind::gaussian;
    g.t = 0.5;
    EXPECT_GE(run_experiment(g, blobs()).v_measure.mean, 0.9);
}

TEST(Pipeline, NeedsLabels) {
    const VectorDataset unlabeled = test::random_dataset(30, 3, 1);
    EXPECT_THROW(run_experiment(config(Method::inc_knn, 2), unlabeled), ValidationError);
}

TEST(Sweep, IncrementalAndStandardCurves) {
    const SweepReport inc = sweep_k(config(Method::inc_knn, 1), blobs(), {1, 2, 3, 6});
    ASSERT_EQ(inc.reports.size(), 4u);
    for (const RunReport& r : inc.reports) {
        EXPECT_EQ(r.disconnected_runs, 0u);
        EXPECT_GT(r.v_measure.mean, 0.3);
    }
    const SweepReport knn = sweep_k(config(Method::knn, 1), blobs(), {1, 6});
    EXPECT_GT(knn.reports[0].disconnected_runs, 0u);
    EXPECT_LT(knn.reports[0].v_measure.mean, knn.reports[1].v_measure.mean);
    EXPECT_THROW(sweep_k(config(Method::knn, 1), blobs(), {}), ParameterError);
    EXPECT_THROW(sweep_k(config(Method::knn_mst, 1), blobs(), {1}), ParameterError);
}

TEST(Baseline, HighDimensionalKMeans) {
    const RunReport r = baseline_kmeans_hd(blobs(), 3, 7);
    EXPECT_GE(r.v_measure.mean, 0.95);
    EXPECT_EQ(to_json(r), to_json(baseline_kmeans_hd(blobs(), 3, 7)));
    EXPECT_EQ(baseline_kmeans_hd(blobs(), 1, 7).v_measure.mean, 0.0);
}

TEST(Components, TableRows) {
    const VectorDataset ten = test::random_dataset(10, 4, 3);
    const auto rows = report_components(ten, Method::knn, Metric::cosine, {9});
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].report.num_components, 1u);
    EXPECT_EQ(rows[0].report.graph_edges, 90u);
    EXPECT_EQ(rows[0].report.digraph_edges, 90u);
    const auto inc = report_components(blobs(), Method::inc_knn, Metric::cosine, {1, 2});
    EXPECT_EQ(inc[0].report.graph_edges, 599u);
    EXPECT_EQ(inc[1].report.graph_edges, 2u * 598u);
    const auto eps = epsilon_table_parameters(1.0);
    EXPECT_EQ(eps, (std::vector<double>{0.9, 0.95, 1.0, 1.05, 1.1}));
    EXPECT_THROW(report_components(ten, Method::knn, Metric::cosine, {1.5}), ParameterError);
}

TEST(Json, RunReportRoundTrip) {
    ExperimentConfig c = config(Method::inc_knn, 2, 2);
    c.with_stats = true;
    const RunReport r = run_experiment(c, blobs());
    const std::string text = to_json(r);
    const RunReport back = run_report_from_json(text);
    EXPECT_EQ(to_json(back), text);
    EXPECT_NEAR(back.v_measure.mean, r.v_measure.mean, 1e-12);
    const auto j = nlohmann::json::parse(text);
    EXPECT_EQ(j["format"], kRunReportFormat);
    EXPECT_TRUE(j["runs"][0].contains("components"));
}

TEST(Json, MergeAveragesPartitions) {
    const RunReport a = run_experiment(config(Method::inc_knn, 2), blobs());
    BlobSpec spec;
    spec.seed = 9;
    const RunReport b = run_experiment(config(Method::inc_knn, 2), make_blobs(spec));
    const auto merged = nlohmann::json::parse(merge_reports({to_json(a), to_json(b)}));
    EXPECT_EQ(merged["format"], kMergedReportFormat);
    EXPECT_NEAR(merged["v_measure"].get<double>(), (a.v_measure.mean + b.v_measure.mean) / 2.0,
                1e-12);
    EXPECT_THROW(merge_reports({}), ParameterError);
    EXPECT_THROW(merge_reports({"{not json"}), FormatError);
}
