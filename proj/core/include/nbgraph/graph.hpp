#pragma once

#include "nbgraph/errors.hpp"
#include "nbgraph/vectorstore.hpp"

#include <Eigen/SparseCore>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace nbgraph {

enum class Metric { cosine, euclidean };

std::string to_string(Metric metric);
Metric parse_metric(const std::string& text);

/// Cosine: 1 - u.v / (|u||v|), clamped to [0, 2]. Euclidean: |u - v|_2.
/// Throws DomainError for a zero vector under cosine.
double distance(std::span<const float> u, std::span<const float> v, Metric metric);

/// Pairwise distances over one dataset. Norms are precomputed; small
/// datasets additionally cache the full N x N table. Cached and uncached
/// lookups return bit-identical values.
class DistanceEvaluator {
public:
    /// Datasets at or below this size get a dense cache by default.
    static constexpr std::size_t kDefaultCacheLimit = 4096;

    DistanceEvaluator(const VectorDataset& data, Metric metric,
                      std::size_t cache_limit = kDefaultCacheLimit);

    std::size_t size() const noexcept { return n_; }
    Metric metric() const noexcept { return metric_; }
    bool cached() const noexcept { return !table_.empty(); }

    double operator()(std::size_t i, std::size_t j) const {
        return table_.empty() ? compute(i, j) : table_[i * n_ + j];
    }

    /// Distance from row i to an arbitrary query vector of matching dimension.
    double to_query(std::size_t i, std::span<const float> query) const;

    /// Largest pairwise distance.
    double max_distance() const;

private:
    double compute(std::size_t i, std::size_t j) const;

    const VectorDataset* data_;
    Metric metric_;
    std::size_t n_;
    std::vector<double> norms_;
    std::vector<double> table_;
};

enum class GraphKind { none, knn, inc_knn, epsilon };

/// How a graph was built. `k` is meaningful for the k-NN kinds, `epsilon`
/// for epsilon graphs, `ordering_seed` for the incremental kind.
struct Provenance {
    GraphKind kind = GraphKind::none;
    std::size_t k = 0;
    std::uint64_t ordering_seed = 0;
    double epsilon = 0.0;
    bool mst_augmented = false;

    /// e.g. "knn(k=5)", "inc_knn(k=2,seed=7)+mst", "epsilon(eps=0.7694)".
    std::string to_string() const;
    static Provenance parse(const std::string& text);

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct Edge {
    std::uint32_t src = 0;
    std::uint32_t dst = 0;
    double distance = 0.0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

/// Compressed undirected adjacency (the support of A or A^T). Neighbor
/// lists are sorted and free of duplicates.
struct Adjacency {
    std::vector<std::size_t> offsets;
    std::vector<std::uint32_t> neighbors;

    std::size_t num_nodes() const noexcept { return offsets.empty() ? 0 : offsets.size() - 1; }
    std::size_t degree(std::size_t v) const noexcept { return offsets[v + 1] - offsets[v]; }
    std::span<const std::uint32_t> of(std::size_t v) const {
        return {neighbors.data() + offsets[v], degree(v)};
    }
    /// Number of unordered pairs.
    std::size_t num_edges() const noexcept { return neighbors.size() / 2; }
    bool connected(std::size_t u, std::size_t v) const;
};

/// Directed neighborhood graph. Edges are kept sorted by (src, dst); no
/// self-loops, no duplicate pairs, endpoints in [0, n).
class NeighborGraph {
public:
    NeighborGraph() = default;
    NeighborGraph(std::size_t n, Metric metric, Provenance provenance, std::vector<Edge> edges);

    std::size_t num_nodes() const noexcept { return n_; }
    std::size_t num_edges() const noexcept { return edges_.size(); }
    std::span<const Edge> edges() const noexcept { return edges_; }
    Metric metric() const noexcept { return metric_; }
    const Provenance& provenance() const noexcept { return provenance_; }

    bool has_edge(std::size_t src, std::size_t dst) const;
    std::vector<std::size_t> out_degrees() const;

    /// Edge-direction-free adjacency used for connectivity and statistics.
    Adjacency undirected() const;

    friend bool operator==(const NeighborGraph&, const NeighborGraph&) = default;

private:
    std::size_t n_ = 0;
    Metric metric_ = Metric::cosine;
    Provenance provenance_;
    std::vector<Edge> edges_;
};

/// Table 1/2 columns of a neighborhood graph.
struct ComponentReport {
    std::size_t num_components = 0;
    std::size_t max_component_size = 0;
    /// Edges of the construction relation: directed k-NN edges for the
    /// k-NN kinds, unordered pairs for epsilon graphs.
    std::size_t graph_edges = 0;
    /// Nonzeros of A or A^T.
    std::size_t digraph_edges = 0;

    friend bool operator==(const ComponentReport&, const ComponentReport&) = default;
};

/// Component id per node (ids dense, ordered by smallest member) plus sizes.
struct ComponentLabels {
    std::vector<std::uint32_t> id;
    std::vector<std::size_t> sizes;

    std::size_t count() const noexcept { return sizes.size(); }
};

ComponentLabels component_labels(const NeighborGraph& graph);
ComponentLabels component_labels(std::size_t n, std::span<const Edge> edges);
ComponentReport connected_components(const NeighborGraph& graph);

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, std::int64_t>;

/// W = (A + A^T) / 2 on the 0/1 adjacency. Entries are 0.5 or 1.
SparseMatrix symmetrize(const NeighborGraph& graph);

void write_graph(const NeighborGraph& graph, std::ostream& out);
void write_graph(const NeighborGraph& graph, const std::filesystem::path& path);
NeighborGraph read_graph(std::istream& in);
NeighborGraph read_graph(const std::filesystem::path& path);

} // namespace nbgraph
