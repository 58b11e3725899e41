#include "nbgraph/graph_stats.hpp"

#include "nbgraph/construction.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <future>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace nbgraph {

namespace {

constexpr double kZ95 = 1.959963984540054;
// Fixed number of sampling streams; results do not depend on core count.
constexpr std::size_t kStreams = 4;

std::size_t count_common(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
    std::size_t count = 0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) {
            ++ia;
        } else if (*ib < *ia) {
            ++ib;
        } else {
            ++count;
            ++ia;
            ++ib;
        }
    }
    return count;
}

// Triangles through each node.
std::vector<std::size_t> triangles_per_node(const Adjacency& adj) {
    const std::size_t n = adj.num_nodes();
    std::vector<std::size_t> tri(n, 0);
    for (std::size_t u = 0; u < n; ++u) {
        const auto nu = adj.of(u);
        for (std::uint32_t v : nu) {
            if (v <= u) {
                continue;
            }
            const auto nv = adj.of(v);
            // Common neighbors w > v close a triangle u < v < w.
            const auto from_u = std::upper_bound(nu.begin(), nu.end(), v);
            const auto from_v = std::upper_bound(nv.begin(), nv.end(), v);
            auto ia = from_u;
            auto ib = from_v;
            while (ia != nu.end() && ib != nv.end()) {
                if (*ia < *ib) {
                    ++ia;
                } else if (*ib < *ia) {
                    ++ib;
                } else {
                    ++tri[u];
                    ++tri[v];
                    ++tri[*ia];
                    ++ia;
                    ++ib;
                }
            }
        }
    }
    return tri;
}

double node_clustering(const Adjacency& adj, std::size_t v) {
    const std::size_t k = adj.degree(v);
    if (k < 2) {
        return 0.0;
    }
    const auto nb = adj.of(v);
    std::size_t links = 0;
    for (std::uint32_t u : nb) {
        links += count_common(nb, adj.of(u));
    }
    // Every neighbor-neighbor edge was seen from both ends.
    return static_cast<double>(links) / (static_cast<double>(k) * static_cast<double>(k - 1));
}

// Streaming sums for a scalar sample; merge is exact addition.
struct Moments {
    double n = 0.0;
    double sum = 0.0;
    double sum_sq = 0.0;

    void add(double x) {
        n += 1.0;
        sum += x;
        sum_sq += x * x;
    }
    void merge(const Moments& o) {
        n += o.n;
        sum += o.sum;
        sum_sq += o.sum_sq;
    }
    double mean() const { return sum / n; }
    double variance() const {
        if (n < 2.0) {
            return 0.0;
        }
        const double m = mean();
        return std::max(0.0, (sum_sq - n * m * m) / (n - 1.0));
    }
    double halfwidth() const { return kZ95 * std::sqrt(variance() / n); }
};

// Sums needed by the assortativity ratio and its delta-method variance.
struct DegreeMoments {
    double n = 0.0;
    // a = j k, b = (j + k) / 2, c = (j^2 + k^2) / 2
    double a = 0.0, b = 0.0, c = 0.0;
    double aa = 0.0, bb = 0.0, cc = 0.0, ab = 0.0, ac = 0.0, bc = 0.0;

    void add(double j, double k) {
        const double va = j * k;
        const double vb = 0.5 * (j + k);
        const double vc = 0.5 * (j * j + k * k);
        n += 1.0;
        a += va;
        b += vb;
        c += vc;
        aa += va * va;
        bb += vb * vb;
        cc += vc * vc;
        ab += va * vb;
        ac += va * vc;
        bc += vb * vc;
    }
    void merge(const DegreeMoments& o) {
        n += o.n;
        a += o.a;
        b += o.b;
        c += o.c;
        aa += o.aa;
        bb += o.bb;
        cc += o.cc;
        ab += o.ab;
        ac += o.ac;
        bc += o.bc;
    }
    bool defined() const {
        const double mb = b / n;
        return n >= 2.0 && c / n - mb * mb > 0.0;
    }
    double ratio() const {
        const double ma = a / n;
        const double mb = b / n;
        const double mc = c / n;
        return (ma - mb * mb) / (mc - mb * mb);
    }
    double halfwidth() const {
        const double ma = a / n;
        const double mb = b / n;
        const double mc = c / n;
        const double num = ma - mb * mb;
        const double den = mc - mb * mb;
        const double ga = 1.0 / den;
        const double gb = 2.0 * mb * (num - den) / (den * den);
        const double gc = -num / (den * den);
        const double scale = n > 1.0 ? n / (n - 1.0) : 1.0;
        auto cov = [&](double sxy, double sx, double sy) {
            return scale * (sxy / n - (sx / n) * (sy / n));
        };
        const double var = ga * ga * cov(aa, a, a) + gb * gb * cov(bb, b, b) +
                           gc * gc * cov(cc, c, c) + 2.0 * ga * gb * cov(ab, a, b) +
                           2.0 * ga * gc * cov(ac, a, c) + 2.0 * gb * gc * cov(bc, b, c);
        return kZ95 * std::sqrt(std::max(0.0, var) / n);
    }
};

// Maps a position in the neighbor array back to its source node.
std::size_t owner_of(const Adjacency& adj, std::size_t slot) {
    const auto it = std::upper_bound(adj.offsets.begin(), adj.offsets.end(), slot);
    return static_cast<std::size_t>(std::distance(adj.offsets.begin(), it)) - 1;
}

// Two-stage sampling over `kStreams` streams. A pilot batch estimates the
// CI half-width and sizes the main sample; the pilot draws are discarded.
// Stopping on the same draws that estimate the variance would bias
// coverage low (Bernoulli statistics near 0 or 1 stop early when lucky).
// If the main sample still misses the target it grows batch by batch.
// `width(acc)` returns the current half-width, or NaN while undefined.
constexpr double kPilotPadding = 1.25;

template <typename Acc, typename Draw, typename Width>
Acc sample_until(std::uint64_t seed, std::size_t stat_id, const StatsOptions& options, Draw draw,
                 Width width, bool& converged) {
    std::vector<std::mt19937_64> rngs;
    for (std::size_t s = 0; s < kStreams; ++s) {
        rngs.emplace_back(derive_seed(seed, stat_id * 1000 + s));
    }
    auto round = [&](std::size_t per_stream) {
        std::vector<std::future<Acc>> jobs;
        for (std::size_t s = 0; s < kStreams; ++s) {
            jobs.push_back(std::async(std::launch::async, [&, s] {
                Acc acc{};
                for (std::size_t i = 0; i < per_stream; ++i) {
                    draw(rngs[s], acc);
                }
                return acc;
            }));
        }
        Acc total{};
        for (auto& job : jobs) {
            total.merge(job.get());
        }
        return total;
    };
    const std::size_t batch_per_stream = std::max<std::size_t>(1, options.batch / kStreams);
    const double target = options.target_halfwidth;

    const Acc pilot = round(batch_per_stream);
    std::size_t needed = static_cast<std::size_t>(pilot.n);
    const double pilot_width = width(pilot);
    if (std::isfinite(pilot_width) && pilot_width > target) {
        // Skewed per-sample values (many zero clustering coefficients) make
        // the pilot variance low more often than high; pad it so the
        // batch-by-batch tail rarely runs.
        const double scale = pilot_width / target;
        needed = static_cast<std::size_t>(std::min(static_cast<double>(options.max_samples),
                                                   std::ceil(kPilotPadding * pilot.n * scale * scale)));
    }
    needed = std::min(needed, options.max_samples);

    Acc total{};
    converged = false;
    while (static_cast<std::size_t>(total.n) < options.max_samples) {
        const auto have = static_cast<std::size_t>(total.n);
        const std::size_t want = have < needed ? needed - have : options.batch;
        const std::size_t cap = options.max_samples - have;
        const std::size_t per_stream =
            std::max<std::size_t>(1, (std::min(want, cap) + kStreams - 1) / kStreams);
        total.merge(round(per_stream));
        if (static_cast<std::size_t>(total.n) >= needed && width(total) <= target) {
            converged = true;
            break;
        }
    }
    return total;
}

Estimate exact(double value) {
    Estimate e;
    e.value = value;
    return e;
}

Estimate undefined_estimate(const std::string& why) {
    Estimate e;
    e.undefined = why;
    return e;
}

PageRankSummary summarize(const std::vector<double>& scores) {
    PageRankSummary s;
    if (scores.empty()) {
        return s;
    }
    s.mean = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
    s.max = *std::max_element(scores.begin(), scores.end());
    for (double p : scores) {
        if (p > 0.0) {
            s.entropy -= p * std::log(p);
        }
    }
    return s;
}

void check_labels(const Adjacency& adj, std::span<const int> labels) {
    if (labels.size() != adj.num_nodes()) {
        throw ParameterError("labels cover " + std::to_string(labels.size()) + " nodes, graph has " +
                             std::to_string(adj.num_nodes()));
    }
}

} // namespace

double density(const Adjacency& adj) {
    const std::size_t n = adj.num_nodes();
    if (n < 2) {
        throw ParameterError("density needs at least two nodes");
    }
    return 2.0 * static_cast<double>(adj.num_edges()) /
           (static_cast<double>(n) * static_cast<double>(n - 1));
}

double density(const NeighborGraph& graph) { return density(graph.undirected()); }

double assortativity(const Adjacency& adj) {
    const std::size_t n = adj.num_nodes();
    double l = 0.0;
    double sum_jk = 0.0;
    double sum_half = 0.0;
    double sum_sq_half = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
        const double j = static_cast<double>(adj.degree(u));
        for (std::uint32_t v : adj.of(u)) {
            if (v <= u) {
                continue;
            }
            const double k = static_cast<double>(adj.degree(v));
            l += 1.0;
            sum_jk += j * k;
            sum_half += 0.5 * (j + k);
            sum_sq_half += 0.5 * (j * j + k * k);
        }
    }
    if (l < 2.0) {
        throw UndefinedStatistic("assortativity needs at least two edges");
    }
    const double mean = sum_half / l;
    const double num = sum_jk / l - mean * mean;
    const double den = sum_sq_half / l - mean * mean;
    if (!(den > 1e-12 * std::max(1.0, mean * mean))) {
        throw UndefinedStatistic("assortativity undefined: all edge endpoints have equal degree");
    }
    return std::clamp(num / den, -1.0, 1.0);
}

double assortativity(const NeighborGraph& graph) { return assortativity(graph.undirected()); }

double transitivity(const Adjacency& adj) {
    const auto tri = triangles_per_node(adj);
    double closed = 0.0;
    double triples = 0.0;
    for (std::size_t v = 0; v < adj.num_nodes(); ++v) {
        const double k = static_cast<double>(adj.degree(v));
        triples += 0.5 * k * (k - 1.0);
        closed += static_cast<double>(tri[v]);
    }
    // Each triangle is counted at its three corners, i.e. 3 x triangles.
    return triples == 0.0 ? 0.0 : closed / triples;
}

double transitivity(const NeighborGraph& graph) { return transitivity(graph.undirected()); }

std::vector<double> local_clustering(const Adjacency& adj) {
    const auto tri = triangles_per_node(adj);
    std::vector<double> out(adj.num_nodes(), 0.0);
    for (std::size_t v = 0; v < out.size(); ++v) {
        const double k = static_cast<double>(adj.degree(v));
        if (k >= 2.0) {
            out[v] = 2.0 * static_cast<double>(tri[v]) / (k * (k - 1.0));
        }
    }
    return out;
}

double local_clustering_avg(const Adjacency& adj) {
    const auto c = local_clustering(adj);
    if (c.empty()) {
        return 0.0;
    }
    return std::accumulate(c.begin(), c.end(), 0.0) / static_cast<double>(c.size());
}

double local_clustering_avg(const NeighborGraph& graph) {
    return local_clustering_avg(graph.undirected());
}

std::vector<double> pagerank(const NeighborGraph& graph, const PageRankOptions& options) {
    const std::size_t n = graph.num_nodes();
    const double d = options.damping;
    if (!(d > 0.0 && d < 1.0)) {
        throw ParameterError("damping must lie in (0, 1)");
    }
    if (n == 0) {
        return {};
    }
    const auto out_deg = graph.out_degrees();
    const double nn = static_cast<double>(n);
    std::vector<double> x(n, 1.0 / nn);
    std::vector<double> next(n);
    double residual = 0.0;
    for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
        double dangling = 0.0;
        for (std::size_t v = 0; v < n; ++v) {
            if (out_deg[v] == 0) {
                dangling += x[v];
            }
        }
        const double base = (1.0 - d) / nn + d * dangling / nn;
        std::fill(next.begin(), next.end(), base);
        for (const Edge& e : graph.edges()) {
            next[e.dst] += d * x[e.src] / static_cast<double>(out_deg[e.src]);
        }
        residual = 0.0;
        for (std::size_t v = 0; v < n; ++v) {
            residual += std::abs(next[v] - x[v]);
        }
        x.swap(next);
        if (residual < options.tolerance) {
            const double total = std::accumulate(x.begin(), x.end(), 0.0);
            for (double& v : x) {
                v /= total;
            }
            return x;
        }
    }
    std::ostringstream msg;
    msg << "PageRank did not converge in " << options.max_iterations << " iterations (L1 residual "
        << residual << ")";
    throw NumericalError(msg.str());
}

double homophily(const Adjacency& adj, std::span<const int> labels) {
    check_labels(adj, labels);
    std::size_t same = 0;
    std::size_t total = 0;
    for (std::size_t u = 0; u < adj.num_nodes(); ++u) {
        for (std::uint32_t v : adj.of(u)) {
            if (v > u) {
                ++total;
                same += labels[u] == labels[v] ? 1 : 0;
            }
        }
    }
    if (total == 0) {
        throw UndefinedStatistic("homophily undefined on an edgeless graph");
    }
    return static_cast<double>(same) / static_cast<double>(total);
}

double homophily(const NeighborGraph& graph, std::span<const int> labels) {
    return homophily(graph.undirected(), labels);
}

StatsReport compute_stats(const NeighborGraph& graph, std::span<const int> labels) {
    const Adjacency adj = graph.undirected();
    StatsReport r;
    r.nodes = graph.num_nodes();
    r.edges = adj.num_edges();
    r.density = r.nodes >= 2 ? exact(density(adj)) : undefined_estimate("fewer than two nodes");
    try {
        r.assortativity = exact(assortativity(adj));
    } catch (const UndefinedStatistic& e) {
        r.assortativity = undefined_estimate(e.what());
    }
    r.transitivity = exact(transitivity(adj));
    r.avg_local_clustering = exact(local_clustering_avg(adj));
    if (!labels.empty()) {
        try {
            r.homophily = exact(homophily(adj, labels));
        } catch (const UndefinedStatistic& e) {
            r.homophily = undefined_estimate(e.what());
        }
    } else {
        r.homophily = undefined_estimate("no labels supplied");
    }
    r.pagerank = summarize(pagerank(graph));
    return r;
}

StatsReport estimate_stats_mc(const NeighborGraph& graph, std::span<const int> labels,
                              std::uint64_t seed, const StatsOptions& options) {
    const Adjacency adj = graph.undirected();
    if (adj.num_nodes() <= options.node_threshold && adj.num_edges() <= options.edge_threshold) {
        return compute_stats(graph, labels);
    }
    if (!labels.empty()) {
        check_labels(adj, labels);
    }
    StatsReport r;
    r.nodes = graph.num_nodes();
    r.edges = adj.num_edges();
    r.density = exact(density(adj));
    PageRankOptions pr = options.pagerank;
    r.pagerank = summarize(pagerank(graph, pr));

    const std::size_t n = adj.num_nodes();
    const std::size_t slots = adj.neighbors.size();
    const bool census = options.target_halfwidth <= 0.0;
    auto mean_width = [](const Moments& m) { return m.halfwidth(); };

    auto finish_mean = [&](const Moments& m, bool converged) {
        Estimate e;
        e.value = m.mean();
        e.sampled = true;
        e.ci_halfwidth = m.halfwidth();
        e.samples = static_cast<std::size_t>(m.n);
        e.converged = converged;
        return e;
    };

    // Local clustering: node sampling.
    {
        Moments m;
        bool converged = true;
        if (census) {
            for (std::size_t v = 0; v < n; ++v) {
                m.add(node_clustering(adj, v));
            }
        } else {
            std::uniform_int_distribution<std::size_t> pick(0, n - 1);
            m = sample_until<Moments>(
                seed, 1, options,
                [&](std::mt19937_64& rng, Moments& acc) { acc.add(node_clustering(adj, pick(rng))); },
                mean_width, converged);
        }
        r.avg_local_clustering = finish_mean(m, converged);
        if (census) {
            r.avg_local_clustering.ci_halfwidth = 0.0;
        }
    }

    // Transitivity: connected triples sampled proportionally to their
    // centers' k(k-1)/2.
    {
        std::vector<double> cumulative(n, 0.0);
        double acc_triples = 0.0;
        for (std::size_t v = 0; v < n; ++v) {
            const double k = static_cast<double>(adj.degree(v));
            acc_triples += 0.5 * k * (k - 1.0);
            cumulative[v] = acc_triples;
        }
        if (acc_triples == 0.0) {
            r.transitivity = exact(0.0);
        } else if (census) {
            Moments m;
            for (std::size_t v = 0; v < n; ++v) {
                const auto nb = adj.of(v);
                for (std::size_t a = 0; a < nb.size(); ++a) {
                    for (std::size_t b = a + 1; b < nb.size(); ++b) {
                        m.add(adj.connected(nb[a], nb[b]) ? 1.0 : 0.0);
                    }
                }
            }
            r.transitivity = finish_mean(m, true);
            r.transitivity.ci_halfwidth = 0.0;
        } else {
            std::uniform_real_distribution<double> unit(0.0, acc_triples);
            bool converged = true;
            const Moments m = sample_until<Moments>(
                seed, 2, options,
                [&](std::mt19937_64& rng, Moments& acc) {
                    const double target = unit(rng);
                    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
                    if (it == cumulative.end()) {
                        --it;
                    }
                    const auto v = static_cast<std::size_t>(std::distance(cumulative.begin(), it));
                    const auto nb = adj.of(v);
                    std::uniform_int_distribution<std::size_t> first(0, nb.size() - 1);
                    std::uniform_int_distribution<std::size_t> second(0, nb.size() - 2);
                    const std::size_t a = first(rng);
                    std::size_t b = second(rng);
                    if (b >= a) {
                        ++b;
                    }
                    acc.add(adj.connected(nb[a], nb[b]) ? 1.0 : 0.0);
                },
                mean_width, converged);
            r.transitivity = finish_mean(m, converged);
        }
    }

    // Homophily and assortativity: undirected edges sampled uniformly via
    // the doubled neighbor array.
    if (slots == 0) {
        r.homophily = undefined_estimate("homophily undefined on an edgeless graph");
        r.assortativity = undefined_estimate("assortativity needs at least two edges");
        return r;
    }
    std::uniform_int_distribution<std::size_t> pick_slot(0, slots - 1);
    if (labels.empty()) {
        r.homophily = undefined_estimate("no labels supplied");
    } else {
        Moments m;
        bool converged = true;
        if (census) {
            for (std::size_t u = 0; u < n; ++u) {
                for (std::uint32_t v : adj.of(u)) {
                    if (v > u) {
                        m.add(labels[u] == labels[v] ? 1.0 : 0.0);
                    }
                }
            }
        } else {
            m = sample_until<Moments>(
                seed, 3, options,
                [&](std::mt19937_64& rng, Moments& acc) {
                    const std::size_t slot = pick_slot(rng);
                    const std::size_t u = owner_of(adj, slot);
                    acc.add(labels[u] == labels[adj.neighbors[slot]] ? 1.0 : 0.0);
                },
                mean_width, converged);
        }
        r.homophily = finish_mean(m, converged);
        if (census) {
            r.homophily.ci_halfwidth = 0.0;
        }
    }
    {
        DegreeMoments m;
        bool converged = true;
        if (census) {
            for (std::size_t u = 0; u < n; ++u) {
                for (std::uint32_t v : adj.of(u)) {
                    if (v > u) {
                        m.add(static_cast<double>(adj.degree(u)), static_cast<double>(adj.degree(v)));
                    }
                }
            }
        } else {
            m = sample_until<DegreeMoments>(
                seed, 4, options,
                [&](std::mt19937_64& rng, DegreeMoments& acc) {
                    const std::size_t slot = pick_slot(rng);
                    const std::size_t u = owner_of(adj, slot);
                    acc.add(static_cast<double>(adj.degree(u)),
                            static_cast<double>(adj.degree(adj.neighbors[slot])));
                },
                [](const DegreeMoments& acc) {
                    return acc.defined() ? acc.halfwidth() : std::numeric_limits<double>::quiet_NaN();
                },
                converged);
        }
        if (!m.defined()) {
            r.assortativity = undefined_estimate("assortativity undefined: zero degree variance");
        } else {
            Estimate e;
            e.value = std::clamp(m.ratio(), -1.0, 1.0);
            e.sampled = true;
            e.ci_halfwidth = census ? 0.0 : m.halfwidth();
            e.samples = static_cast<std::size_t>(m.n);
            e.converged = converged;
            r.assortativity = e;
        }
    }
    return r;
}

DocumentStats document_stats(std::span<const std::string> texts) {
    DocumentStats s;
    if (texts.empty()) {
        return s;
    }
    double words = 0.0;
    double sentences = 0.0;
    double chars = 0.0;
    for (const std::string& doc : texts) {
        std::istringstream is(doc);
        std::string token;
        while (is >> token) {
            words += 1.0;
        }
        bool content = false;
        for (std::size_t i = 0; i < doc.size(); ++i) {
            const char ch = doc[i];
            const bool terminal = ch == '.' || ch == '!' || ch == '?';
            if (terminal) {
                if (content) {
                    sentences += 1.0;
                }
                content = false;
            } else if (!std::isspace(static_cast<unsigned char>(ch))) {
                content = true;
            }
            if ((static_cast<unsigned char>(ch) & 0xC0u) != 0x80u) {
                chars += 1.0;
            }
        }
        if (content) {
            sentences += 1.0;
        }
    }
    const double n = static_cast<double>(texts.size());
    s.avg_words = words / n;
    s.avg_sentences = sentences / n;
    s.avg_characters = chars / n;
    return s;
}

} // namespace nbgraph
