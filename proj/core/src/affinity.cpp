#include "nbgraph/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nbgraph {

AffinityMatrix affinity_connection(const NeighborGraph& graph) {
    AffinityMatrix a;
    a.weights = symmetrize(graph);
    a.kind = AffinityKind::connection;
    return a;
}

AffinityMatrix affinity_gaussian(const NeighborGraph& graph, const VectorDataset& data, double t,
                                 KernelDistance kernel) {
    if (!(t > 0.0)) {
        throw ParameterError("Gaussian affinity needs t > 0");
    }
    if (data.size() != graph.num_nodes()) {
        throw ParameterError("dataset and graph sizes differ");
    }
    std::vector<double> scale(data.size(), 1.0);
    if (kernel == KernelDistance::normalized_euclidean) {
        for (std::size_t i = 0; i < data.size(); ++i) {
            double sq = 0.0;
            for (float v : data.row(i)) {
                sq += static_cast<double>(v) * v;
            }
            if (sq == 0.0) {
                throw DomainError("row " + std::to_string(i) + " is a zero vector");
            }
            scale[i] = 1.0 / std::sqrt(sq);
        }
    }
    AffinityMatrix a;
    a.kind = AffinityKind::gaussian;
    a.t = t;
    a.weights = symmetrize(graph);
    for (Eigen::Index col = 0; col < a.weights.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(a.weights, col); it; ++it) {
            const auto u = data.row(static_cast<std::size_t>(it.row()));
            const auto v = data.row(static_cast<std::size_t>(col));
            const double su = scale[static_cast<std::size_t>(it.row())];
            const double sv = scale[static_cast<std::size_t>(col)];
            // Accumulate in a fixed order so w_ij == w_ji bitwise.
            const bool swap = it.row() > col;
            double sq = 0.0;
            for (std::size_t d = 0; d < data.dim(); ++d) {
                const double a_d = swap ? v[d] * sv : u[d] * su;
                const double b_d = swap ? u[d] * su : v[d] * sv;
                const double diff = a_d - b_d;
                sq += diff * diff;
            }
            // Floor at the smallest normal so underflow never drops support.
            it.valueRef() = std::max(std::exp(-sq / (4.0 * t)), std::numeric_limits<double>::min());
        }
    }
    return a;
}

ComponentLabels affinity_components(const AffinityMatrix& affinity) {
    std::vector<Edge> edges;
    const auto& w = affinity.weights;
    for (Eigen::Index col = 0; col < w.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(w, col); it; ++it) {
            if (it.value() != 0.0 && it.row() != col) {
                edges.push_back({static_cast<std::uint32_t>(it.row()),
                                 static_cast<std::uint32_t>(col), 0.0});
            }
        }
    }
    return component_labels(affinity.size(), edges);
}

} // namespace nbgraph
