#include "nbgraph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace nbgraph {

namespace {

double dot(std::span<const float> u, std::span<const float> v) {
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        acc += static_cast<double>(u[i]) * static_cast<double>(v[i]);
    }
    return acc;
}

double euclidean(std::span<const float> u, std::span<const float> v) {
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double diff = static_cast<double>(u[i]) - static_cast<double>(v[i]);
        acc += diff * diff;
    }
    return std::sqrt(acc);
}

double cosine_from(double uv, double nu, double nv) {
    const double d = 1.0 - uv / (nu * nv);
    return std::clamp(d, 0.0, 2.0);
}

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) {
            return;
        }
        if (size_[a] < size_[b]) {
            std::swap(a, b);
        }
        parent_[b] = a;
        size_[a] += size_[b];
    }

private:
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> size_;
};

std::string format_double(double v) {
    std::ostringstream os;
    os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
    return os.str();
}

} // namespace

std::string to_string(Metric metric) {
    return metric == Metric::cosine ? "cosine" : "euclidean";
}

Metric parse_metric(const std::string& text) {
    if (text == "cosine") {
        return Metric::cosine;
    }
    if (text == "euclidean") {
        return Metric::euclidean;
    }
    throw ParameterError("unknown metric '" + text + "'");
}

double distance(std::span<const float> u, std::span<const float> v, Metric metric) {
    if (u.size() != v.size()) {
        throw ParameterError("distance between vectors of different dimension");
    }
    if (metric == Metric::euclidean) {
        return euclidean(u, v);
    }
    const double nu = std::sqrt(dot(u, u));
    const double nv = std::sqrt(dot(v, v));
    if (nu == 0.0 || nv == 0.0) {
        throw DomainError("cosine distance is undefined for a zero vector");
    }
    return cosine_from(dot(u, v), nu, nv);
}

DistanceEvaluator::DistanceEvaluator(const VectorDataset& data, Metric metric,
                                     std::size_t cache_limit)
    : data_(&data), metric_(metric), n_(data.size()) {
    if (metric_ == Metric::cosine) {
        norms_.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            const auto r = data.row(i);
            norms_[i] = std::sqrt(dot(r, r));
            if (norms_[i] == 0.0) {
                throw DomainError("row " + std::to_string(i) +
                                  " is a zero vector; cosine distance undefined");
            }
        }
    }
    if (n_ <= cache_limit && n_ > 0) {
        table_.assign(n_ * n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = i + 1; j < n_; ++j) {
                const double d = compute(i, j);
                table_[i * n_ + j] = d;
                table_[j * n_ + i] = d;
            }
        }
    }
}

double DistanceEvaluator::compute(std::size_t i, std::size_t j) const {
    if (i == j) {
        return 0.0;
    }
    // Always evaluate with the smaller index first so d(i,j) == d(j,i) bitwise.
    if (j < i) {
        std::swap(i, j);
    }
    const auto u = data_->row(i);
    const auto v = data_->row(j);
    if (metric_ == Metric::euclidean) {
        return euclidean(u, v);
    }
    return cosine_from(dot(u, v), norms_[i], norms_[j]);
}

double DistanceEvaluator::to_query(std::size_t i, std::span<const float> query) const {
    return distance(data_->row(i), query, metric_);
}

double DistanceEvaluator::max_distance() const {
    double best = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = i + 1; j < n_; ++j) {
            best = std::max(best, (*this)(i, j));
        }
    }
    return best;
}

std::string Provenance::to_string() const {
    std::ostringstream os;
    switch (kind) {
    case GraphKind::none:
        os << "none";
        break;
    case GraphKind::knn:
        os << "knn(k=" << k << ")";
        break;
    case GraphKind::inc_knn:
        os << "inc_knn(k=" << k << ",seed=" << ordering_seed << ")";
        break;
    case GraphKind::epsilon:
        os << "epsilon(eps=" << format_double(epsilon) << ")";
        break;
    }
    if (mst_augmented) {
        os << "+mst";
    }
    return os.str();
}

Provenance Provenance::parse(const std::string& text) {
    Provenance p;
    std::string body = text;
    const std::string suffix = "+mst";
    if (body.size() >= suffix.size() &&
        body.compare(body.size() - suffix.size(), suffix.size(), suffix) == 0) {
        p.mst_augmented = true;
        body.resize(body.size() - suffix.size());
    }
    auto fail = [&] { return FormatError("cannot parse provenance '" + text + "'"); };
    if (body == "none") {
        return p;
    }
    const auto open = body.find('(');
    if (open == std::string::npos || body.back() != ')') {
        throw fail();
    }
    const std::string head = body.substr(0, open);
    const std::string args = body.substr(open + 1, body.size() - open - 2);
    std::istringstream is(args);
    std::string item;
    if (head == "knn") {
        p.kind = GraphKind::knn;
    } else if (head == "inc_knn") {
        p.kind = GraphKind::inc_knn;
    } else if (head == "epsilon") {
        p.kind = GraphKind::epsilon;
    } else {
        throw fail();
    }
    try {
        while (std::getline(is, item, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos) {
                throw fail();
            }
            const std::string key = item.substr(0, eq);
            const std::string value = item.substr(eq + 1);
            if (key == "k") {
                p.k = std::stoull(value);
            } else if (key == "seed") {
                p.ordering_seed = std::stoull(value);
            } else if (key == "eps") {
                p.epsilon = std::stod(value);
            } else {
                throw fail();
            }
        }
    } catch (const std::invalid_argument&) {
        throw fail();
    } catch (const std::out_of_range&) {
        throw fail();
    }
    return p;
}

bool Adjacency::connected(std::size_t u, std::size_t v) const {
    const auto nb = of(u);
    return std::binary_search(nb.begin(), nb.end(), static_cast<std::uint32_t>(v));
}

NeighborGraph::NeighborGraph(std::size_t n, Metric metric, Provenance provenance,
                             std::vector<Edge> edges)
    : n_(n), metric_(metric), provenance_(provenance), edges_(std::move(edges)) {
    if (n_ > std::numeric_limits<std::uint32_t>::max()) {
        throw ValidationError("graph too large");
    }
    std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
        return a.src != b.src ? a.src < b.src : a.dst < b.dst;
    });
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        const Edge& e = edges_[i];
        if (e.src >= n_ || e.dst >= n_) {
            throw ValidationError("edge endpoint out of range: " + std::to_string(e.src) + "->" +
                                  std::to_string(e.dst));
        }
        if (e.src == e.dst) {
            throw ValidationError("self-loop on node " + std::to_string(e.src));
        }
        if (!(e.distance >= 0.0) || !std::isfinite(e.distance)) {
            throw ValidationError("edge distance must be finite and nonnegative");
        }
        if (i > 0 && edges_[i - 1].src == e.src && edges_[i - 1].dst == e.dst) {
            throw ValidationError("duplicate edge " + std::to_string(e.src) + "->" +
                                  std::to_string(e.dst));
        }
    }
}

bool NeighborGraph::has_edge(std::size_t src, std::size_t dst) const {
    const Edge key{static_cast<std::uint32_t>(src), static_cast<std::uint32_t>(dst), 0.0};
    return std::binary_search(edges_.begin(), edges_.end(), key, [](const Edge& a, const Edge& b) {
        return a.src != b.src ? a.src < b.src : a.dst < b.dst;
    });
}

std::vector<std::size_t> NeighborGraph::out_degrees() const {
    std::vector<std::size_t> deg(n_, 0);
    for (const Edge& e : edges_) {
        ++deg[e.src];
    }
    return deg;
}

Adjacency NeighborGraph::undirected() const {
    Adjacency adj;
    adj.offsets.assign(n_ + 1, 0);
    for (const Edge& e : edges_) {
        ++adj.offsets[e.src + 1];
        ++adj.offsets[e.dst + 1];
    }
    for (std::size_t i = 0; i < n_; ++i) {
        adj.offsets[i + 1] += adj.offsets[i];
    }
    std::vector<std::uint32_t> raw(adj.offsets.back());
    std::vector<std::size_t> cursor(adj.offsets.begin(), adj.offsets.end() - 1);
    for (const Edge& e : edges_) {
        raw[cursor[e.src]++] = e.dst;
        raw[cursor[e.dst]++] = e.src;
    }
    // Sort and dedupe each list; mutual pairs appear twice before this.
    std::vector<std::size_t> offsets(n_ + 1, 0);
    adj.neighbors.reserve(raw.size());
    for (std::size_t v = 0; v < n_; ++v) {
        auto first = raw.begin() + static_cast<std::ptrdiff_t>(adj.offsets[v]);
        auto last = raw.begin() + static_cast<std::ptrdiff_t>(adj.offsets[v + 1]);
        std::sort(first, last);
        last = std::unique(first, last);
        adj.neighbors.insert(adj.neighbors.end(), first, last);
        offsets[v + 1] = adj.neighbors.size();
    }
    adj.offsets = std::move(offsets);
    return adj;
}

ComponentLabels component_labels(std::size_t n, std::span<const Edge> edges) {
    UnionFind uf(n);
    for (const Edge& e : edges) {
        uf.unite(e.src, e.dst);
    }
    ComponentLabels out;
    out.id.assign(n, 0);
    std::vector<std::int64_t> root_to_id(n, -1);
    for (std::size_t v = 0; v < n; ++v) {
        const std::size_t r = uf.find(v);
        if (root_to_id[r] < 0) {
            root_to_id[r] = static_cast<std::int64_t>(out.sizes.size());
            out.sizes.push_back(0);
        }
        out.id[v] = static_cast<std::uint32_t>(root_to_id[r]);
        ++out.sizes[out.id[v]];
    }
    return out;
}

ComponentLabels component_labels(const NeighborGraph& graph) {
    return component_labels(graph.num_nodes(), graph.edges());
}

ComponentReport connected_components(const NeighborGraph& graph) {
    const ComponentLabels labels = component_labels(graph);
    ComponentReport report;
    report.num_components = labels.count();
    report.max_component_size =
        labels.sizes.empty() ? 0 : *std::max_element(labels.sizes.begin(), labels.sizes.end());
    const Adjacency adj = graph.undirected();
    report.digraph_edges = adj.neighbors.size();
    report.graph_edges = graph.provenance().kind == GraphKind::epsilon &&
                                 !graph.provenance().mst_augmented
                             ? adj.num_edges()
                             : graph.num_edges();
    return report;
}

SparseMatrix symmetrize(const NeighborGraph& graph) {
    using Triplet = Eigen::Triplet<double, std::int64_t>;
    std::vector<Triplet> triplets;
    triplets.reserve(2 * graph.num_edges());
    for (const Edge& e : graph.edges()) {
        triplets.emplace_back(e.src, e.dst, 0.5);
        triplets.emplace_back(e.dst, e.src, 0.5);
    }
    const auto n = static_cast<std::int64_t>(graph.num_nodes());
    SparseMatrix w(n, n);
    w.setFromTriplets(triplets.begin(), triplets.end());
    w.makeCompressed();
    return w;
}

void write_graph(const NeighborGraph& graph, std::ostream& out) {
    out << "# n=" << graph.num_nodes() << " metric=" << to_string(graph.metric())
        << " provenance=" << graph.provenance().to_string() << '\n';
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (const Edge& e : graph.edges()) {
        out << e.src << '\t' << e.dst << '\t' << e.distance << '\n';
    }
}

void write_graph(const NeighborGraph& graph, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    write_graph(graph, out);
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

NeighborGraph read_graph(std::istream& in) {
    std::string header;
    if (!std::getline(in, header) || header.rfind("# ", 0) != 0) {
        throw FormatError("graph file must start with a '# n=... metric=... provenance=...' line");
    }
    std::istringstream hs(header.substr(2));
    std::string field;
    std::size_t n = 0;
    bool have_n = false;
    Metric metric = Metric::cosine;
    Provenance provenance;
    while (hs >> field) {
        const auto eq = field.find('=');
        if (eq == std::string::npos) {
            throw FormatError("bad header field '" + field + "'");
        }
        const std::string key = field.substr(0, eq);
        const std::string value = field.substr(eq + 1);
        if (key == "n") {
            try {
                n = std::stoull(value);
            } catch (const std::exception&) {
                throw FormatError("bad node count '" + value + "'");
            }
            have_n = true;
        } else if (key == "metric") {
            try {
                metric = parse_metric(value);
            } catch (const ParameterError& e) {
                throw FormatError(e.what());
            }
        } else if (key == "provenance") {
            provenance = Provenance::parse(value);
        }
    }
    if (!have_n) {
        throw FormatError("graph header lacks n=");
    }
    std::vector<Edge> edges;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::istringstream ls(line);
        unsigned long long src = 0;
        unsigned long long dst = 0;
        double dist = 0.0;
        if (!(ls >> src >> dst >> dist)) {
            throw FormatError("line " + std::to_string(line_no) + ": expected src<TAB>dst<TAB>distance");
        }
        edges.push_back({static_cast<std::uint32_t>(src), static_cast<std::uint32_t>(dst), dist});
    }
    return NeighborGraph(n, metric, provenance, std::move(edges));
}

NeighborGraph read_graph(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    return read_graph(in);
}

} // namespace nbgraph
