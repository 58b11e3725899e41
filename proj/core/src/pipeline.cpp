#include "nbgraph/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <thread>

namespace nbgraph {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

// Runs f(0..n-1) on up to hardware_concurrency threads. Results are written
// by index, so output never depends on scheduling.
template <typename F>
void parallel_for(std::size_t n, F&& f) {
    const std::size_t workers =
        std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            f(i);
        }
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    f(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    pool.clear();
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

bool deterministic_graph(Method method) {
    return method == Method::knn || method == Method::epsilon || method == Method::knn_mst;
}

Aggregate aggregate(const std::vector<double>& xs, bool with_spread) {
    Aggregate a;
    if (xs.empty()) {
        return a;
    }
    double sum = 0.0;
    for (double x : xs) {
        sum += x;
    }
    a.mean = sum / static_cast<double>(xs.size());
    if (with_spread) {
        double sq = 0.0;
        for (double x : xs) {
            sq += (x - a.mean) * (x - a.mean);
        }
        a.stddev = std::sqrt(sq / static_cast<double>(xs.size()));
    }
    return a;
}

struct RunOutcome {
    RunRecord record;
    std::optional<NeighborGraph> graph;
};

RunOutcome execute_run(const DistanceEvaluator& dist, const ExperimentConfig& config,
                       const VectorDataset& data, std::span<const int> truth, std::size_t clusters,
                       std::size_t run, const NeighborGraph* shared_graph, bool keep_graph) {
    RunOutcome out;
    RunRecord& rec = out.record;
    rec.run = run;
    StageTimes times;

    auto t0 = Clock::now();
    NeighborGraph graph = shared_graph ? *shared_graph : build_graph(dist, config, run);
    times.build_ms = elapsed_ms(t0);
    if (config.method == Method::inc_knn || config.method == Method::inc_knn_mst) {
        rec.ordering_seed = graph.provenance().ordering_seed;
    }
    rec.components = connected_components(graph);
    rec.disconnected = rec.components.num_components > 1;

    t0 = Clock::now();
    const AffinityMatrix affinity = config.affinity == AffinityKind::gaussian
                                        ? affinity_gaussian(graph, data, *config.t, config.kernel)
                                        : affinity_connection(graph);
    times.affinity_ms = elapsed_ms(t0);

    try {
        t0 = Clock::now();
        SpectralEmbedding embedding;
        try {
            embedding = laplacian_eigenmaps(affinity, clusters);
        } catch (const DisconnectedGraphError& e) {
            rec.diagnostic = "disconnected graph: " + std::to_string(e.components()) + " components";
            if (config.disconnected == DisconnectedPolicy::skip) {
                rec.scored = false;
            } else {
                embedding = laplacian_eigenmaps_per_component(affinity, clusters);
                *rec.diagnostic += "; scored with per-component fallback embedding";
            }
        }
        times.embed_ms = elapsed_ms(t0);
        if (rec.scored) {
            rec.eigen_iterations = embedding.iterations;
            t0 = Clock::now();
            const std::vector<int> predicted =
                config.assigner == Assigner::qr
                    ? qr_assign(embedding, clusters)
                    : kmeans_assign(embedding, clusters, derive_seed(config.seed, 1'000'000 + run));
            times.assign_ms = elapsed_ms(t0);
            rec.scores = score_clustering(truth, predicted, config.beta);
        }
    } catch (const NumericalError& e) {
        rec.scored = false;
        rec.scores.reset();
        rec.diagnostic = (rec.diagnostic ? *rec.diagnostic + "; " : std::string()) +
                         "numerical failure: " + e.what();
    }
    if (config.timings) {
        rec.times = times;
    }
    if (keep_graph) {
        out.graph = std::move(graph);
    }
    return out;
}

} // namespace

std::string to_string(Method method) {
    switch (method) {
    case Method::knn:
        return "knn";
    case Method::inc_knn:
        return "inc_knn";
    case Method::epsilon:
        return "epsilon";
    case Method::inc_knn_mst:
        return "inc_knn_mst";
    case Method::knn_mst:
        return "knn_mst";
    }
    return "knn";
}

std::string to_string(Assigner assigner) { return assigner == Assigner::qr ? "qr" : "kmeans"; }

std::string to_string(AffinityKind kind) {
    return kind == AffinityKind::gaussian ? "gaussian" : "connection";
}

std::string to_string(DisconnectedPolicy policy) {
    return policy == DisconnectedPolicy::skip ? "skip" : "fallback";
}

Method parse_method(const std::string& text) {
    for (Method m : {Method::knn, Method::inc_knn, Method::epsilon, Method::inc_knn_mst,
                     Method::knn_mst}) {
        if (to_string(m) == text) {
            return m;
        }
    }
    throw ParameterError("unknown method '" + text + "'");
}

Assigner parse_assigner(const std::string& text) {
    if (text == "qr") {
        return Assigner::qr;
    }
    if (text == "kmeans") {
        return Assigner::kmeans;
    }
    throw ParameterError("unknown assigner '" + text + "'");
}

AffinityKind parse_affinity(const std::string& text) {
    if (text == "connection") {
        return AffinityKind::connection;
    }
    if (text == "gaussian") {
        return AffinityKind::gaussian;
    }
    throw ParameterError("unknown affinity '" + text + "'");
}

DisconnectedPolicy parse_disconnected_policy(const std::string& text) {
    if (text == "fallback") {
        return DisconnectedPolicy::fallback;
    }
    if (text == "skip") {
        return DisconnectedPolicy::skip;
    }
    throw ParameterError("unknown disconnected policy '" + text + "'");
}

bool uses_k(Method method) { return method != Method::epsilon; }

void ExperimentConfig::validate() const {
    if (uses_k(method)) {
        if (!k) {
            throw ParameterError("method " + to_string(method) + " needs k");
        }
        if (epsilon) {
            throw ParameterError("method " + to_string(method) + " takes k, not epsilon");
        }
        if (*k < 1) {
            throw ParameterError("k must be at least 1");
        }
    } else {
        if (!epsilon) {
            throw ParameterError("method epsilon needs epsilon");
        }
        if (k) {
            throw ParameterError("method epsilon takes epsilon, not k");
        }
        if (!(*epsilon > 0.0)) {
            throw ParameterError("epsilon must be positive");
        }
    }
    if (affinity == AffinityKind::gaussian && !(t && *t > 0.0)) {
        throw ParameterError("gaussian affinity needs t > 0");
    }
    if (repeats < 1) {
        throw ParameterError("repeats must be at least 1");
    }
    if (!(beta >= 0.0)) {
        throw ParameterError("beta must be nonnegative");
    }
}

VectorDataset load_dataset(const ExperimentConfig& config) {
    if (config.input.empty()) {
        throw ParameterError("no input dataset given");
    }
    VectorDataset data = read_embeddings(config.input, sniff_embedding_format(config.input));
    if (!config.labels.empty()) {
        data.set_labels(read_labels(config.labels));
    }
    return data;
}

NeighborGraph build_graph(const DistanceEvaluator& dist, const ExperimentConfig& config,
                          std::size_t run) {
    const std::size_t n = dist.size();
    switch (config.method) {
    case Method::knn:
        return build_knn_standard(dist, *config.k);
    case Method::knn_mst:
        return augment_mst(build_knn_standard(dist, *config.k), dist);
    case Method::epsilon:
        return build_epsilon(dist, *config.epsilon);
    case Method::inc_knn:
    case Method::inc_knn_mst: {
        const Ordering ordering = Ordering::random(n, derive_seed(config.seed, run));
        NeighborGraph g = build_knn_incremental(dist, *config.k, ordering);
        return config.method == Method::inc_knn_mst ? augment_mst(g, dist) : g;
    }
    }
    throw ParameterError("unknown method");
}

RunReport run_experiment(const ExperimentConfig& config) {
    config.validate();
    return run_experiment(config, load_dataset(config));
}

RunReport run_experiment(const ExperimentConfig& config, const VectorDataset& data) {
    config.validate();
    data.validate();
    if (!data.labels()) {
        throw ValidationError("evaluation needs ground-truth labels");
    }
    const std::size_t clusters = config.clusters > 0 ? config.clusters : data.labels()->num_classes();
    if (clusters < 1 || clusters + 1 > data.size()) {
        throw ParameterError("cluster count must be in [1, N-1]; got " + std::to_string(clusters));
    }
    if (uses_k(config.method) && *config.k + 1 > data.size()) {
        throw ParameterError("k must be at most N-1");
    }
    const std::span<const int> truth = data.labels()->ids;
    const DistanceEvaluator dist(data, config.metric);

    std::optional<NeighborGraph> shared;
    if (deterministic_graph(config.method)) {
        shared = build_graph(dist, config, 0);
    }

    std::vector<RunOutcome> outcomes(config.repeats);
    parallel_for(config.repeats, [&](std::size_t r) {
        outcomes[r] = execute_run(dist, config, data, truth, clusters, r,
                                  shared ? &*shared : nullptr, r == 0 && !shared);
    });

    RunReport report;
    report.dataset = data.name();
    report.points = data.size();
    report.dim = data.dim();
    report.clusters = clusters;
    report.method = to_string(config.method);
    report.config = config;
    std::vector<double> v;
    std::vector<double> h;
    std::vector<double> c;
    for (auto& o : outcomes) {
        if (o.record.disconnected) {
            ++report.disconnected_runs;
        }
        if (o.record.scores) {
            ++report.scored_runs;
            v.push_back(o.record.scores->v_measure);
            h.push_back(o.record.scores->homogeneity);
            c.push_back(o.record.scores->completeness);
        }
        report.runs.push_back(std::move(o.record));
    }
    const bool spread = config.repeats > 1;
    report.v_measure = aggregate(v, spread);
    report.homogeneity = aggregate(h, spread);
    report.completeness = aggregate(c, spread);
    if (config.with_stats) {
        const NeighborGraph& g0 = shared ? *shared : *outcomes.front().graph;
        report.stats = estimate_stats_mc(g0, truth, derive_seed(config.seed, 2'000'000));
    }
    return report;
}

SweepReport sweep_k(const ExperimentConfig& config, const VectorDataset& data,
                    const std::vector<std::size_t>& k_values) {
    if (k_values.empty()) {
        throw ParameterError("k sweep needs at least one k value");
    }
    if (config.method != Method::knn && config.method != Method::inc_knn) {
        throw ParameterError("k sweep supports methods knn and inc_knn only");
    }
    SweepReport sweep;
    sweep.k_values = k_values;
    for (std::size_t k : k_values) {
        ExperimentConfig c = config;
        c.k = k;
        c.epsilon.reset();
        sweep.reports.push_back(run_experiment(c, data));
    }
    return sweep;
}

RunReport baseline_kmeans_hd(const VectorDataset& data, std::size_t clusters, std::uint64_t seed,
                             double beta) {
    data.validate();
    if (!data.labels()) {
        throw ValidationError("evaluation needs ground-truth labels");
    }
    if (clusters < 1 || clusters > data.size()) {
        throw ParameterError("cluster count must be in [1, N]");
    }
    Eigen::MatrixXd points(static_cast<Eigen::Index>(data.size()),
                           static_cast<Eigen::Index>(data.dim()));
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto row = data.row(i);
        for (std::size_t d = 0; d < data.dim(); ++d) {
            points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = row[d];
        }
    }
    const KMeansResult km = kmeans(points, clusters, seed);
    RunReport report;
    report.dataset = data.name();
    report.points = data.size();
    report.dim = data.dim();
    report.clusters = clusters;
    report.method = "kmeans_hd";
    report.config.clusters = clusters;
    report.config.seed = seed;
    report.config.beta = beta;
    report.config.assigner = Assigner::kmeans;
    report.config.with_stats = false;
    RunRecord rec;
    rec.scores = score_clustering(data.labels()->ids, km.labels, beta);
    if (km.degenerate) {
        rec.diagnostic = "all points coincide; single cluster";
    }
    report.runs.push_back(rec);
    report.scored_runs = 1;
    report.v_measure.mean = rec.scores->v_measure;
    report.homogeneity.mean = rec.scores->homogeneity;
    report.completeness.mean = rec.scores->completeness;
    return report;
}

std::vector<ComponentRow> report_components(const VectorDataset& data, Method method, Metric metric,
                                            const std::vector<double>& parameters,
                                            std::uint64_t seed) {
    const DistanceEvaluator dist(data, metric);
    std::vector<ComponentRow> rows;
    for (double p : parameters) {
        ExperimentConfig c;
        c.method = method;
        c.metric = metric;
        c.seed = seed;
        if (uses_k(method)) {
            if (!(p >= 1.0) || p != std::floor(p)) {
                throw ParameterError("k values must be positive integers");
            }
            c.k = static_cast<std::size_t>(p);
        } else {
            c.epsilon = p;
        }
        c.validate();
        rows.push_back({p, connected_components(build_graph(dist, c, 0))});
    }
    return rows;
}

std::vector<double> epsilon_table_parameters(double epsilon0) {
    return {epsilon0 * 0.90, epsilon0 * 0.95, epsilon0, epsilon0 * 1.05, epsilon0 * 1.10};
}

} // namespace nbgraph
