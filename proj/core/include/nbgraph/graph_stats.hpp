#pragma once

#include "nbgraph/graph.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nbgraph {

// Statistics are computed on the undirected view of a graph except
// PageRank, which follows edge direction.

double density(const NeighborGraph& graph);
double density(const Adjacency& adj);

/// Degree assortativity (Pearson correlation of endpoint degrees, every
/// undirected edge counted in both orientations). Throws UndefinedStatistic
/// on fewer than two edges or zero degree variance.
double assortativity(const NeighborGraph& graph);
double assortativity(const Adjacency& adj);

/// 3 * triangles / connected triples; 0 when there are no triples.
double transitivity(const NeighborGraph& graph);
double transitivity(const Adjacency& adj);

/// Per-node C_v = 2|E_v| / (k_v (k_v - 1)); 0 for k_v < 2.
std::vector<double> local_clustering(const Adjacency& adj);
double local_clustering_avg(const NeighborGraph& graph);
double local_clustering_avg(const Adjacency& adj);

struct PageRankOptions {
    double damping = 0.85;
    double tolerance = 1e-10;
    std::size_t max_iterations = 200;
};

/// Power iteration on the directed graph; dangling mass is spread
/// uniformly. Scores sum to 1.
std::vector<double> pagerank(const NeighborGraph& graph, const PageRankOptions& options = {});

/// Fraction of undirected edges whose endpoints share a label. Throws
/// UndefinedStatistic on an edgeless graph.
double homophily(const NeighborGraph& graph, std::span<const int> labels);
double homophily(const Adjacency& adj, std::span<const int> labels);

struct Estimate {
    double value = 0.0;
    bool sampled = false;
    /// 95% half-width; 0 for exact values.
    double ci_halfwidth = 0.0;
    std::size_t samples = 0;
    bool converged = true;
    /// Set when the statistic is undefined on this graph.
    std::optional<std::string> undefined;
};

struct PageRankSummary {
    double mean = 0.0;
    double max = 0.0;
    /// Shannon entropy (nats) of the score distribution.
    double entropy = 0.0;
};

struct DocumentStats {
    double avg_words = 0.0;
    double avg_sentences = 0.0;
    double avg_characters = 0.0;
};

struct StatsReport {
    std::size_t nodes = 0;
    std::size_t edges = 0;
    Estimate density;
    Estimate assortativity;
    Estimate transitivity;
    Estimate avg_local_clustering;
    Estimate homophily;
    PageRankSummary pagerank;
    std::optional<DocumentStats> documents;
};

struct StatsOptions {
    /// Exact computation above either limit is considered too expensive.
    std::size_t node_threshold = 50'000;
    std::size_t edge_threshold = 5'000'000;
    /// Target 95% half-width; 0 selects exhaustive evaluation.
    double target_halfwidth = 0.005;
    /// Pilot size; the pilot sizes the main sample and is then discarded.
    std::size_t batch = 1'000;
    /// Cap on the main sample per statistic.
    std::size_t max_samples = 20'000'000;
    PageRankOptions pagerank;
};

/// Exact statistics for every field.
StatsReport compute_stats(const NeighborGraph& graph, std::span<const int> labels);

/// Monte-Carlo statistics: node-sampled local clustering, edge-sampled
/// homophily and assortativity, triple-sampled transitivity. Graphs under
/// both thresholds take the exact path.
StatsReport estimate_stats_mc(const NeighborGraph& graph, std::span<const int> labels,
                              std::uint64_t seed, const StatsOptions& options = {});

/// Whitespace words, terminal-punctuation sentences, UTF-8 code points.
DocumentStats document_stats(std::span<const std::string> texts);

} // namespace nbgraph
