#include "nbgraph/construction.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <utility>

namespace nbgraph {

namespace {

using Candidate = std::pair<double, std::uint32_t>;

// Keeps the k smallest (distance, index) pairs seen so far, sorted. One
// comparison rejects most candidates, so a scan costs about one pass.
class NearestK {
public:
    explicit NearestK(std::size_t k) : k_(k) { best_.reserve(k + 1); }

    void clear() { best_.clear(); }

    void offer(double d, std::uint32_t index) {
        const Candidate c{d, index};
        if (best_.size() == k_ && !(c < best_.back())) {
            return;
        }
        best_.insert(std::upper_bound(best_.begin(), best_.end(), c), c);
        if (best_.size() > k_) {
            best_.pop_back();
        }
    }

    const std::vector<Candidate>& sorted() const { return best_; }

private:
    std::size_t k_;
    std::vector<Candidate> best_;
};

void check_k(std::size_t k, std::size_t n) {
    if (k < 1 || k + 1 > n) {
        throw ParameterError("k must be in [1, N-1]; got k=" + std::to_string(k) +
                             " with N=" + std::to_string(n));
    }
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) {
            return false;
        }
        parent_[std::max(a, b)] = std::min(a, b);
        return true;
    }

private:
    std::vector<std::size_t> parent_;
};

} // namespace

Ordering Ordering::identity(std::size_t n) {
    Ordering o;
    o.permutation.resize(n);
    std::iota(o.permutation.begin(), o.permutation.end(), std::size_t{0});
    return o;
}

Ordering Ordering::random(std::size_t n, std::uint64_t seed) {
    Ordering o = identity(n);
    o.seed = seed;
    std::mt19937_64 rng(seed);
    std::shuffle(o.permutation.begin(), o.permutation.end(), rng);
    return o;
}

bool Ordering::valid() const {
    std::vector<bool> seen(permutation.size(), false);
    for (std::size_t v : permutation) {
        if (v >= seen.size() || seen[v]) {
            return false;
        }
        seen[v] = true;
    }
    return true;
}

std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t run) {
    return splitmix64(splitmix64(base_seed) ^ splitmix64(run + 0x632be59bd9b4e019ULL));
}

NeighborGraph build_knn_standard(const VectorDataset& data, std::size_t k, Metric metric) {
    check_k(k, data.size());
    return build_knn_standard(DistanceEvaluator(data, metric), k);
}

NeighborGraph build_knn_standard(const DistanceEvaluator& dist, std::size_t k) {
    const std::size_t n = dist.size();
    check_k(k, n);
    std::vector<Edge> edges;
    edges.reserve(n * k);
    NearestK nearest(k);
    for (std::size_t i = 0; i < n; ++i) {
        nearest.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) {
                nearest.offer(dist(i, j), static_cast<std::uint32_t>(j));
            }
        }
        for (const auto& [d, j] : nearest.sorted()) {
            edges.push_back({static_cast<std::uint32_t>(i), j, d});
        }
    }
    Provenance p;
    p.kind = GraphKind::knn;
    p.k = k;
    return NeighborGraph(n, dist.metric(), p, std::move(edges));
}

NeighborGraph build_knn_incremental(const VectorDataset& data, std::size_t k, Metric metric,
                                    const Ordering& ordering) {
    check_k(k, data.size());
    return build_knn_incremental(DistanceEvaluator(data, metric), k, ordering);
}

NeighborGraph build_knn_incremental(const DistanceEvaluator& dist, std::size_t k,
                                    const Ordering& ordering) {
    const std::size_t n = dist.size();
    check_k(k, n);
    if (ordering.permutation.size() != n || !ordering.valid()) {
        throw ParameterError("ordering is not a permutation of the dataset rows");
    }
    const auto& order = ordering.permutation;
    std::vector<Edge> edges;
    edges.reserve(k * (n - k));
    NearestK nearest(k);
    for (std::size_t t = k; t < n; ++t) {
        const std::size_t node = order[t];
        nearest.clear();
        for (std::size_t s = 0; s < t; ++s) {
            nearest.offer(dist(node, order[s]), static_cast<std::uint32_t>(order[s]));
        }
        for (const auto& [d, j] : nearest.sorted()) {
            edges.push_back({static_cast<std::uint32_t>(node), j, d});
        }
    }
    Provenance p;
    p.kind = GraphKind::inc_knn;
    p.k = k;
    p.ordering_seed = ordering.seed;
    return NeighborGraph(n, dist.metric(), p, std::move(edges));
}

NeighborGraph extend_incremental(const NeighborGraph& graph, const VectorDataset& data,
                                 std::span<const float> new_vector) {
    const Provenance& p = graph.provenance();
    if (p.kind != GraphKind::inc_knn || p.mst_augmented) {
        throw ParameterError("extend_incremental needs an unaugmented incremental graph; got " +
                             p.to_string());
    }
    if (p.k < 1) {
        throw ParameterError("incremental graph has k=0");
    }
    const std::size_t n = graph.num_nodes();
    if (data.size() != n) {
        throw ParameterError("dataset has " + std::to_string(data.size()) +
                             " rows but graph has " + std::to_string(n) + " nodes");
    }
    if (new_vector.size() != data.dim()) {
        throw ParameterError("new vector has dimension " + std::to_string(new_vector.size()) +
                             ", dataset has " + std::to_string(data.dim()));
    }
    std::vector<Edge> edges(graph.edges().begin(), graph.edges().end());
    if (n >= p.k) {
        NearestK nearest(p.k);
        for (std::size_t i = 0; i < n; ++i) {
            // Existing row first, matching the evaluator's argument order.
            nearest.offer(distance(data.row(i), new_vector, graph.metric()), static_cast<std::uint32_t>(i));
        }
        for (const auto& [d, j] : nearest.sorted()) {
            edges.push_back({static_cast<std::uint32_t>(n), j, d});
        }
    }
    return NeighborGraph(n + 1, graph.metric(), p, std::move(edges));
}

NeighborGraph build_epsilon(const VectorDataset& data, double epsilon, Metric metric) {
    if (!(epsilon > 0.0)) {
        throw ParameterError("epsilon must be positive");
    }
    return build_epsilon(DistanceEvaluator(data, metric), epsilon);
}

NeighborGraph build_epsilon(const DistanceEvaluator& dist, double epsilon) {
    if (!(epsilon > 0.0)) {
        throw ParameterError("epsilon must be positive");
    }
    const std::size_t n = dist.size();
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = dist(i, j);
            if (d <= epsilon) {
                edges.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), d});
                edges.push_back({static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(i), d});
            }
        }
    }
    Provenance p;
    p.kind = GraphKind::epsilon;
    p.epsilon = epsilon;
    return NeighborGraph(n, dist.metric(), p, std::move(edges));
}

bool epsilon_connected(const DistanceEvaluator& dist, double epsilon) {
    const std::size_t n = dist.size();
    if (n <= 1) {
        return true;
    }
    // Graph search that only scans still-unreached nodes.
    std::vector<std::size_t> unreached(n - 1);
    std::iota(unreached.begin(), unreached.end(), std::size_t{1});
    std::vector<std::size_t> frontier{0};
    while (!frontier.empty() && !unreached.empty()) {
        const std::size_t v = frontier.back();
        frontier.pop_back();
        std::size_t kept = 0;
        for (std::size_t u : unreached) {
            if (dist(v, u) <= epsilon) {
                frontier.push_back(u);
            } else {
                unreached[kept++] = u;
            }
        }
        unreached.resize(kept);
    }
    return unreached.empty();
}

double find_epsilon0(const VectorDataset& data, Metric metric, double tol) {
    if (data.size() < 2) {
        throw ParameterError("find_epsilon0 needs at least two points");
    }
    return find_epsilon0(DistanceEvaluator(data, metric), tol);
}

double find_epsilon0(const DistanceEvaluator& dist, double tol) {
    if (dist.size() < 2) {
        throw ParameterError("find_epsilon0 needs at least two points");
    }
    if (!(tol > 0.0)) {
        throw ParameterError("bisection tolerance must be positive");
    }
    double lo = 0.0;
    double hi = dist.max_distance();
    for (int iter = 0; iter < kEpsilonMaxIterations && hi - lo > tol; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (epsilon_connected(dist, mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

std::vector<Edge> minimum_spanning_tree(const DistanceEvaluator& dist) {
    const std::size_t n = dist.size();
    std::vector<Edge> tree;
    if (n < 2) {
        return tree;
    }
    tree.reserve(n - 1);
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> key(n, inf);
    std::vector<std::uint32_t> parent(n, 0);
    std::vector<bool> in_tree(n, false);
    std::size_t current = 0;
    in_tree[0] = true;
    for (std::size_t added = 1; added < n; ++added) {
        std::size_t best = n;
        double best_key = inf;
        for (std::size_t v = 0; v < n; ++v) {
            if (in_tree[v]) {
                continue;
            }
            const double d = dist(current, v);
            if (d < key[v]) {
                key[v] = d;
                parent[v] = static_cast<std::uint32_t>(current);
            }
            if (key[v] < best_key || best == n) {
                best_key = key[v];
                best = v;
            }
        }
        in_tree[best] = true;
        tree.push_back({static_cast<std::uint32_t>(best), parent[best], key[best]});
        current = best;
    }
    return tree;
}

NeighborGraph augment_mst(const NeighborGraph& graph, const VectorDataset& data, Metric metric) {
    if (data.size() != graph.num_nodes()) {
        throw ParameterError("dataset and graph sizes differ");
    }
    return augment_mst(graph, DistanceEvaluator(data, metric));
}

NeighborGraph augment_mst(const NeighborGraph& graph, const DistanceEvaluator& dist) {
    if (dist.size() != graph.num_nodes()) {
        throw ParameterError("dataset and graph sizes differ");
    }
    if (dist.metric() != graph.metric()) {
        throw ParameterError("metric mismatch between graph and distance evaluator");
    }
    std::vector<Edge> edges(graph.edges().begin(), graph.edges().end());
    for (const Edge& e : minimum_spanning_tree(dist)) {
        if (!graph.has_edge(e.src, e.dst) && !graph.has_edge(e.dst, e.src)) {
            edges.push_back(e);
        }
    }
    Provenance p = graph.provenance();
    p.mst_augmented = true;
    return NeighborGraph(graph.num_nodes(), graph.metric(), p, std::move(edges));
}

} // namespace nbgraph
