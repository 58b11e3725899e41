#include "nbgraph/construction.hpp"
#include "nbgraph/graph.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <random>
#include <set>
#include <sstream>

using namespace nbgraph;

namespace {

std::vector<float> e(std::size_t i, std::size_t d, float s = 1.0f) {
    std::vector<float> v(d, 0.0f);
    v[i] = s;
    return v;
}

NeighborGraph random_digraph(std::size_t n, double p, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(p);
    std::vector<Edge> edges;
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j = 0; j < n; ++j) {
            if (i != j && coin(rng)) {
                edges.push_back({i, j, 1.0});
            }
        }
    }
    return NeighborGraph(n, Metric::euclidean, {}, std::move(edges));
}

// Reachability closure by repeated DFS from every node.
std::size_t dfs_components(const NeighborGraph& g, std::size_t* largest) {
    const std::size_t n = g.num_nodes();
    std::vector<std::vector<std::size_t>> adj(n);
    for (const Edge& ed : g.edges()) {
        adj[ed.src].push_back(ed.dst);
        adj[ed.dst].push_back(ed.src);
    }
    std::vector<int> seen(n, 0);
    std::size_t count = 0;
    *largest = 0;
    for (std::size_t s = 0; s < n; ++s) {
        if (seen[s]) {
            continue;
        }
        ++count;
        std::size_t size = 0;
        std::vector<std::size_t> stack{s};
        seen[s] = 1;
        while (!stack.empty()) {
            const std::size_t v = stack.back();
            stack.pop_back();
            ++size;
            for (std::size_t w : adj[v]) {
                if (!seen[w]) {
                    seen[w] = 1;
                    stack.push_back(w);
                }
            }
        }
        *largest = std::max(*largest, size);
    }
    return count;
}

} // namespace

TEST(Distance, CosineExamples) {
    EXPECT_DOUBLE_EQ(distance(e(0, 3), e(0, 3), Metric::cosine), 0.0);
    EXPECT_DOUBLE_EQ(distance(e(0, 3), e(0, 3, -1.0f), Metric::cosine), 2.0);
    EXPECT_DOUBLE_EQ(distance(e(0, 3), e(1, 3), Metric::cosine), 1.0);
    // Scale invariant.
    EXPECT_NEAR(distance(std::vector<float>{1, 2}, std::vector<float>{3, 6}, Metric::cosine), 0.0, 1e-12);
}

TEST(Distance, EuclideanExample) {
    EXPECT_DOUBLE_EQ(distance(std::vector<float>{0, 0}, std::vector<float>{3, 4}, Metric::euclidean), 5.0);
}

TEST(Distance, ZeroVectorUnderCosineIsDomainError) {
    EXPECT_THROW(distance(std::vector<float>{0, 0}, std::vector<float>{1, 0}, Metric::cosine), DomainError);
    EXPECT_THROW(distance(std::vector<float>{0}, std::vector<float>{1, 0}, Metric::euclidean),
                 ParameterError);
}

TEST(Distance, CosineBoundedEuclideanTriangle) {
    const VectorDataset d = test::random_dataset(60, 7, 11);
    for (std::size_t i = 0; i + 2 < d.size(); ++i) {
        const double c = distance(d.row(i), d.row(i + 1), Metric::cosine);
        EXPECT_GE(c, 0.0);
        EXPECT_LE(c, 2.0);
        const double ab = distance(d.row(i), d.row(i + 1), Metric::euclidean);
        const double bc = distance(d.row(i + 1), d.row(i + 2), Metric::euclidean);
        const double ac = distance(d.row(i), d.row(i + 2), Metric::euclidean);
        EXPECT_LE(ac, ab + bc + 1e-12);
    }
}

TEST(Distance, EvaluatorMatchesFreeFunctionAndIsSymmetric) {
    const VectorDataset d = test::random_dataset(30, 5, 4);
    for (Metric m : {Metric::cosine, Metric::euclidean}) {
        const DistanceEvaluator cached(d, m);
        const DistanceEvaluator direct(d, m, 0);
        ASSERT_TRUE(cached.cached());
        ASSERT_FALSE(direct.cached());
        for (std::size_t i = 0; i < d.size(); ++i) {
            for (std::size_t j = 0; j < d.size(); ++j) {
                EXPECT_EQ(cached(i, j), cached(j, i));
                EXPECT_EQ(cached(i, j), direct(i, j));
                EXPECT_NEAR(cached(i, j), distance(d.row(i), d.row(j), m), 1e-12);
            }
        }
    }
}

TEST(Graph, InvariantsRejected) {
    EXPECT_THROW(NeighborGraph(2, Metric::cosine, {}, {{0, 0, 0.0}}), ValidationError);
    EXPECT_THROW(NeighborGraph(2, Metric::cosine, {}, {{0, 2, 0.0}}), ValidationError);
    EXPECT_THROW(NeighborGraph(2, Metric::cosine, {}, {{0, 1, 0.0}, {0, 1, 0.0}}), ValidationError);
    EXPECT_THROW(NeighborGraph(2, Metric::cosine, {}, {{0, 1, -1.0}}), ValidationError);
}

TEST(Graph, EdgesAreCanonicallySorted) {
    const NeighborGraph g(3, Metric::cosine, {}, {{2, 0, 1.0}, {0, 2, 1.0}, {1, 0, 1.0}});
    const auto edges = g.edges();
    EXPECT_EQ(edges[0].src, 0u);
    EXPECT_EQ(edges[1].src, 1u);
    EXPECT_EQ(edges[2].src, 2u);
    EXPECT_TRUE(g.has_edge(2, 0));
    EXPECT_FALSE(g.has_edge(1, 2));
}

TEST(Components, PathGraph) {
    const NeighborGraph g(3, Metric::euclidean, {}, {{0, 1, 1.0}, {1, 2, 1.0}});
    const ComponentReport r = connected_components(g);
    EXPECT_EQ(r.num_components, 1u);
    EXPECT_EQ(r.max_component_size, 3u);
    EXPECT_EQ(r.digraph_edges, 4u);
}

TEST(Components, MatchesDfsOracle) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const std::size_t n = 1 + seed % 50;
        const NeighborGraph g = random_digraph(n, 1.5 / static_cast<double>(n), seed);
        std::size_t largest = 0;
        const std::size_t count = dfs_components(g, &largest);
        const ComponentReport r = connected_components(g);
        ASSERT_EQ(r.num_components, count) << "seed " << seed;
        ASSERT_EQ(r.max_component_size, largest) << "seed " << seed;
        ASSERT_EQ(r.num_components == 1, r.max_component_size == n);
        ASSERT_EQ(component_labels(g).count(), count);
    }
}

TEST(Symmetrize, SingleAndMutualEdges) {
    const SparseMatrix w1 = symmetrize(NeighborGraph(2, Metric::euclidean, {}, {{0, 1, 1.0}}));
    EXPECT_EQ(w1.coeff(0, 1), 0.5);
    EXPECT_EQ(w1.coeff(1, 0), 0.5);
    const SparseMatrix w2 =
        symmetrize(NeighborGraph(2, Metric::euclidean, {}, {{0, 1, 1.0}, {1, 0, 1.0}}));
    EXPECT_EQ(w2.coeff(0, 1), 1.0);
    EXPECT_EQ(w2.coeff(1, 0), 1.0);
}

TEST(Symmetrize, MatchesDenseOracleAndNonzeroCount) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const std::size_t n = 20;
        const NeighborGraph g = random_digraph(n, 0.15, seed);
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
        for (const Edge& ed : g.edges()) {
            a(ed.src, ed.dst) = 1.0;
        }
        const Eigen::MatrixXd oracle = (a + a.transpose()) / 2.0;
        const Eigen::MatrixXd w = Eigen::MatrixXd(symmetrize(g));
        ASSERT_EQ(w, oracle);
        ASSERT_EQ(w, w.transpose());
        const auto nnz = static_cast<std::size_t>((oracle.array() != 0.0).count());
        ASSERT_EQ(connected_components(g).digraph_edges, nnz);
    }
}

TEST(Serialization, RoundTrip) {
    const VectorDataset d = test::random_dataset(40, 6, 8);
    const NeighborGraph g = build_knn_incremental(d, 3, Metric::cosine, Ordering::random(40, 99));
    std::stringstream ss;
    write_graph(g, ss);
    std::string first_line;
    std::getline(ss, first_line);
    EXPECT_EQ(first_line, "# n=40 metric=cosine provenance=inc_knn(k=3,seed=99)");
    ss.seekg(0);
    const NeighborGraph back = read_graph(ss);
    EXPECT_EQ(back, g);
}

TEST(Serialization, ProvenanceParse) {
    for (const std::string text :
         {"knn(k=5)", "inc_knn(k=2,seed=7)+mst", "inc_knn(k=1,seed=0)", "knn(k=3)+mst"}) {
        EXPECT_EQ(Provenance::parse(text).to_string(), text);
    }
    Provenance p;
    p.kind = GraphKind::epsilon;
    p.epsilon = 0.7694;
    EXPECT_EQ(Provenance::parse(p.to_string()), p);
    EXPECT_THROW(Provenance::parse("bogus"), FormatError);
}

TEST(Serialization, MalformedInputs) {
    std::stringstream no_header("0\t1\t0.5\n");
    EXPECT_THROW(read_graph(no_header), FormatError);
    std::stringstream bad_line("# n=2 metric=cosine provenance=knn(k=1)\n0 1\n");
    EXPECT_THROW(read_graph(bad_line), FormatError);
    std::stringstream bad_edge("# n=2 metric=cosine provenance=knn(k=1)\n0\t5\t0.5\n");
    EXPECT_THROW(read_graph(bad_edge), ValidationError);
}
