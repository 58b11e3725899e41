#pragma once

#include "nbgraph/graph.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace nbgraph {

/// Node insertion order for the incremental builder.
struct Ordering {
    std::vector<std::size_t> permutation;
    std::uint64_t seed = 0;

    static Ordering identity(std::size_t n);
    /// Uniformly random permutation drawn from `seed`.
    static Ordering random(std::size_t n, std::uint64_t seed);

    bool valid() const;
};

/// Counter-based seed stream: run r of a batch is reproducible from
/// (base_seed, r) alone.
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t run);

/// Every node gets edges to its k nearest other nodes. Ties go to the
/// smaller node index.
NeighborGraph build_knn_standard(const VectorDataset& data, std::size_t k, Metric metric);
NeighborGraph build_knn_standard(const DistanceEvaluator& dist, std::size_t k);

/// Incremental k-NN graph. The first k nodes of `ordering` start without
/// edges; every later node links to its k nearest among the nodes inserted
/// before it. The result has exactly k(N-k) edges and is connected.
NeighborGraph build_knn_incremental(const VectorDataset& data, std::size_t k, Metric metric,
                                    const Ordering& ordering);
NeighborGraph build_knn_incremental(const DistanceEvaluator& dist, std::size_t k,
                                    const Ordering& ordering);

/// Appends `new_vector` as node n of an incremental graph over `data`.
/// Existing edges are untouched; the new node links to its k nearest
/// existing nodes (none while the graph still has fewer than k nodes).
NeighborGraph extend_incremental(const NeighborGraph& graph, const VectorDataset& data,
                                 std::span<const float> new_vector);

/// Undirected edge {i, j} iff distance <= epsilon, stored in both directions.
NeighborGraph build_epsilon(const VectorDataset& data, double epsilon, Metric metric);
NeighborGraph build_epsilon(const DistanceEvaluator& dist, double epsilon);

/// True iff the epsilon graph at `epsilon` is connected, without
/// materializing it.
bool epsilon_connected(const DistanceEvaluator& dist, double epsilon);

inline constexpr double kEpsilonTolerance = 1e-6;
inline constexpr int kEpsilonMaxIterations = 64;

/// Smallest epsilon (within tol) at which the epsilon graph is connected,
/// found by bisection over [0, max pairwise distance].
double find_epsilon0(const VectorDataset& data, Metric metric, double tol = kEpsilonTolerance);
double find_epsilon0(const DistanceEvaluator& dist, double tol = kEpsilonTolerance);

/// Exact minimum spanning tree of the complete distance graph (dense Prim,
/// O(N^2) time, O(N) memory). Edges point from each node to the tree node
/// it was attached to.
std::vector<Edge> minimum_spanning_tree(const DistanceEvaluator& dist);

/// Union of `graph` with the minimum spanning tree of the full pairwise
/// distance graph. MST pairs already present in either direction are not
/// added again.
NeighborGraph augment_mst(const NeighborGraph& graph, const VectorDataset& data, Metric metric);
NeighborGraph augment_mst(const NeighborGraph& graph, const DistanceEvaluator& dist);

} // namespace nbgraph
