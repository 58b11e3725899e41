#pragma once

// Brute-force reference implementations shared by the unit and acceptance
// tests. Deliberately naive and independent of the library's algorithms.

#include "nbgraph/graph.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <tuple>
#include <vector>

namespace nbgraph::oracle {

using EdgeSet = std::set<std::pair<std::uint32_t, std::uint32_t>>;

inline std::vector<std::vector<double>> distances(const VectorDataset& d, Metric m) {
    std::vector<std::vector<double>> out(d.size(), std::vector<double>(d.size(), 0.0));
    for (std::size_t i = 0; i < d.size(); ++i) {
        for (std::size_t j = 0; j < d.size(); ++j) {
            out[i][j] = i == j ? 0.0 : distance(d.row(std::min(i, j)), d.row(std::max(i, j)), m);
        }
    }
    return out;
}

// Full sort of every distance row; ties by index.
inline EdgeSet knn(const std::vector<std::vector<double>>& dist, std::size_t k) {
    EdgeSet edges;
    const std::size_t n = dist.size();
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::pair<double, std::size_t>> row;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) {
                row.emplace_back(dist[i][j], j);
            }
        }
        std::sort(row.begin(), row.end());
        for (std::size_t r = 0; r < k; ++r) {
            edges.emplace(i, row[r].second);
        }
    }
    return edges;
}

inline EdgeSet epsilon(const std::vector<std::vector<double>>& dist, double eps) {
    EdgeSet edges;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        for (std::size_t j = 0; j < dist.size(); ++j) {
            if (i != j && dist[i][j] <= eps) {
                edges.emplace(i, j);
            }
        }
    }
    return edges;
}

struct Mst {
    double total = 0.0;
    double bottleneck = 0.0;
    std::size_t edges = 0;
    EdgeSet pairs; // (min, max) endpoints
};

// Kruskal with a plain union-find over the sorted complete edge list.
inline Mst kruskal(const std::vector<std::vector<double>>& dist) {
    const std::size_t n = dist.size();
    std::vector<std::tuple<double, std::size_t, std::size_t>> all;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            all.emplace_back(dist[i][j], i, j);
        }
    }
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) {
            x = parent[x];
        }
        return x;
    };
    Mst mst;
    for (const auto& [w, i, j] : all) {
        const std::size_t a = find(i);
        const std::size_t b = find(j);
        if (a != b) {
            parent[a] = b;
            mst.total += w;
            mst.bottleneck = std::max(mst.bottleneck, w);
            ++mst.edges;
            mst.pairs.emplace(i, j);
        }
    }
    return mst;
}

inline EdgeSet edge_set(const NeighborGraph& g) {
    EdgeSet s;
    for (const Edge& e : g.edges()) {
        s.emplace(e.src, e.dst);
    }
    return s;
}

} // namespace nbgraph::oracle
