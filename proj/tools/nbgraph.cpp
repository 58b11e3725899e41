// nbgraph: neighborhood-graph construction and spectral clustering experiments.
//
// Exit codes: 0 success, 2 parameter error, 3 data error, 4 numerical error.

#include "nbgraph/pipeline.hpp"
#include "nbgraph/synthetic.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

namespace {

using namespace nbgraph;

constexpr int kExitParameter = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

struct CommonArgs {
    std::string input;
    std::string labels;
    std::string method = "inc_knn";
    std::vector<double> k;
    std::vector<double> epsilon;
    std::string metric = "cosine";
    std::string affinity = "connection";
    double t = 0.0;
    std::string kernel = "normalized_euclidean";
    std::string assign = "qr";
    std::size_t clusters = 0;
    std::size_t repeats = 1;
    std::uint64_t seed = 0;
    double beta = 1.0;
    std::string disconnected = "fallback";
    bool timings = false;
    bool no_stats = false;
    std::string out;
};

void write_output(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path + " for writing");
    }
    out << text;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::size_t as_k(double v) {
    if (!(v >= 1.0) || v != static_cast<double>(static_cast<std::size_t>(v))) {
        throw ParameterError("k must be a positive integer");
    }
    return static_cast<std::size_t>(v);
}

ExperimentConfig to_config(const CommonArgs& a) {
    ExperimentConfig c;
    c.input = a.input;
    c.labels = a.labels;
    c.method = parse_method(a.method);
    if (a.k.size() > 1 || a.epsilon.size() > 1) {
        throw ParameterError("this subcommand takes a single k or epsilon");
    }
    if (!a.k.empty()) {
        c.k = as_k(a.k.front());
    }
    if (!a.epsilon.empty()) {
        c.epsilon = a.epsilon.front();
    }
    c.metric = parse_metric(a.metric);
    c.affinity = parse_affinity(a.affinity);
    if (a.t > 0.0) {
        c.t = a.t;
    }
    if (a.kernel == "euclidean") {
        c.kernel = KernelDistance::euclidean;
    } else if (a.kernel == "normalized_euclidean") {
        c.kernel = KernelDistance::normalized_euclidean;
    } else {
        throw ParameterError("unknown kernel distance '" + a.kernel + "'");
    }
    c.assigner = parse_assigner(a.assign);
    c.clusters = a.clusters;
    c.repeats = a.repeats;
    c.seed = a.seed;
    c.beta = a.beta;
    c.disconnected = parse_disconnected_policy(a.disconnected);
    c.with_stats = !a.no_stats;
    c.timings = a.timings;
    return c;
}

void add_data_flags(CLI::App* cmd, CommonArgs& a, bool labels_required) {
    cmd->add_option("--input", a.input, "Embeddings (EMB1 binary or TSV/CSV)")->required();
    auto* l = cmd->add_option("--labels", a.labels, "Label file, one label per line");
    if (labels_required) {
        l->required();
    }
    cmd->add_option("--metric", a.metric, "cosine | euclidean")->capture_default_str();
    cmd->add_option("--out", a.out, "Output path (default stdout)");
}

void add_graph_flags(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("--method", a.method, "knn | inc_knn | epsilon | inc_knn_mst | knn_mst")
        ->capture_default_str();
    cmd->add_option("--k", a.k, "Neighbors per node")->delimiter(',');
    cmd->add_option("--epsilon", a.epsilon, "Distance threshold")->delimiter(',');
    cmd->add_option("--seed", a.seed, "Base seed for orderings and k-means")->capture_default_str();
}

void add_cluster_flags(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("--affinity", a.affinity, "connection | gaussian")->capture_default_str();
    cmd->add_option("--t", a.t, "Gaussian kernel width (required for gaussian)");
    cmd->add_option("--kernel-distance", a.kernel, "euclidean | normalized_euclidean")
        ->capture_default_str();
    cmd->add_option("--assign", a.assign, "qr | kmeans")->capture_default_str();
    cmd->add_option("--clusters", a.clusters, "Cluster count (default: number of label classes)");
    cmd->add_option("--repeats", a.repeats, "Runs with fresh node orderings")->capture_default_str();
    cmd->add_option("--beta", a.beta, "V-measure beta")->capture_default_str();
    cmd->add_option("--disconnected", a.disconnected, "fallback | skip")->capture_default_str();
    cmd->add_flag("--timings", a.timings, "Record per-stage wall times (breaks byte-identical output)");
    cmd->add_flag("--no-stats", a.no_stats, "Skip graph statistics");
}

VectorDataset load(const CommonArgs& a) {
    VectorDataset data = read_embeddings(a.input, sniff_embedding_format(a.input));
    if (!a.labels.empty()) {
        data.set_labels(read_labels(a.labels));
    }
    return data;
}

std::string components_tsv(const std::vector<ComponentRow>& rows, Method method) {
    std::ostringstream os;
    os << (uses_k(method) ? "k" : "epsilon")
       << "\tnum_components\tmax_component_size\tgraph_edges\tdigraph_edges\n";
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (const auto& r : rows) {
        os << r.parameter << '\t' << r.report.num_components << '\t' << r.report.max_component_size
           << '\t' << r.report.graph_edges << '\t' << r.report.digraph_edges << '\n';
    }
    return os.str();
}

int run(int argc, char** argv) {
    CLI::App app{"Neighborhood graphs and spectral clustering of embedding matrices"};
    app.require_subcommand(1);
    CommonArgs a;

    auto* components = app.add_subcommand("components", "Connectivity table for k or epsilon values");
    add_data_flags(components, a, false);
    add_graph_flags(components, a);
    bool epsilon_table = false;
    std::string format = "json";
    components->add_flag("--epsilon-table", epsilon_table,
                         "Use epsilon0 and epsilon0 +-5%, +-10% as parameters");
    components->add_option("--format", format, "json | tsv")->capture_default_str();

    auto* epsilon0 = app.add_subcommand("epsilon0", "Smallest epsilon giving a connected graph");
    add_data_flags(epsilon0, a, false);
    double tol = kEpsilonTolerance;
    epsilon0->add_option("--tol", tol, "Bisection tolerance")->capture_default_str();

    auto* build = app.add_subcommand("build", "Build a neighborhood graph and write its edge list");
    add_data_flags(build, a, false);
    add_graph_flags(build, a);
    std::size_t run_index = 0;
    build->add_option("--run", run_index, "Run index selecting the ordering seed")->capture_default_str();

    auto* extend = app.add_subcommand("extend", "Append vectors to an incremental graph");
    std::string graph_path;
    std::string new_vectors;
    extend->add_option("--graph", graph_path, "Existing incremental graph")->required();
    extend->add_option("--input", a.input, "Embeddings the graph was built from")->required();
    extend->add_option("--vectors", new_vectors, "New vectors (EMB1 or TSV), appended in order")
        ->required();
    extend->add_option("--out", a.out, "Output path (default stdout)");

    auto* cluster = app.add_subcommand("cluster", "Build, embed, assign and score");
    add_data_flags(cluster, a, true);
    add_graph_flags(cluster, a);
    add_cluster_flags(cluster, a);

    auto* embed = app.add_subcommand("embed", "Write the Laplacian eigenmap of a graph as EMB1");
    add_data_flags(embed, a, false);
    add_graph_flags(embed, a);
    embed->add_option("--affinity", a.affinity, "connection | gaussian")->capture_default_str();
    embed->add_option("--t", a.t, "Gaussian kernel width");
    std::size_t dims = 0;
    embed->add_option("--dims", dims, "Embedding dimensions")->required();

    auto* sweep = app.add_subcommand("sweep", "Cluster over a list of k values");
    add_data_flags(sweep, a, true);
    add_graph_flags(sweep, a);
    add_cluster_flags(sweep, a);

    auto* baseline = app.add_subcommand("baseline", "k-means on the raw high-dimensional vectors");
    add_data_flags(baseline, a, true);
    baseline->add_option("--clusters", a.clusters, "Cluster count (default: label classes)");
    baseline->add_option("--seed", a.seed, "k-means seed")->capture_default_str();
    baseline->add_option("--beta", a.beta, "V-measure beta")->capture_default_str();

    auto* stats = app.add_subcommand("stats", "Graph statistics of a built or stored graph");
    add_data_flags(stats, a, false);
    add_graph_flags(stats, a);
    std::string texts;
    double halfwidth = 0.005;
    std::size_t node_threshold = StatsOptions{}.node_threshold;
    stats->add_option("--graph", graph_path, "Use a stored graph instead of building one");
    stats->add_option("--texts", texts, "Raw documents for word/sentence/character averages");
    stats->add_option("--halfwidth", halfwidth, "Target 95% CI half-width for sampled statistics")
        ->capture_default_str();
    stats->add_option("--sample-above", node_threshold, "Sample when the graph has more nodes")
        ->capture_default_str();

    auto* merge = app.add_subcommand("merge", "Average run reports over partitions");
    std::vector<std::string> reports;
    merge->add_option("reports", reports, "Run report JSON files")->required();
    merge->add_option("--out", a.out, "Output path (default stdout)");

    auto* synth = app.add_subcommand("synth", "Generate a labeled Gaussian-blob dataset");
    BlobSpec spec;
    std::string labels_out;
    synth->add_option("--blobs", spec.blobs)->capture_default_str();
    synth->add_option("--points", spec.points)->capture_default_str();
    synth->add_option("--dim", spec.dim)->capture_default_str();
    synth->add_option("--separation", spec.separation, "Center distance in sigmas")->capture_default_str();
    synth->add_option("--outliers", spec.outlier_fraction, "Uniform outlier fraction")->capture_default_str();
    synth->add_option("--group-size", spec.group_size, "Near-duplicate group size")->capture_default_str();
    synth->add_option("--group-spread", spec.group_spread, "Jitter inside a group, in sigmas")
        ->capture_default_str();
    synth->add_option("--seed", spec.seed)->capture_default_str();
    synth->add_option("--out", a.out, "EMB1 output")->required();
    synth->add_option("--labels-out", labels_out, "Label file output")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitParameter;
    }

    if (*components) {
        const VectorDataset data = load(a);
        const Method method = parse_method(a.method);
        const Metric metric = parse_metric(a.metric);
        std::vector<double> params = uses_k(method) ? a.k : a.epsilon;
        if (epsilon_table) {
            if (method != Method::epsilon) {
                throw ParameterError("--epsilon-table needs --method epsilon");
            }
            params = epsilon_table_parameters(find_epsilon0(data, metric));
        }
        if (params.empty()) {
            throw ParameterError(uses_k(method) ? "give --k values" : "give --epsilon values");
        }
        const auto rows = report_components(data, method, metric, params, a.seed);
        write_output(format == "tsv" ? components_tsv(rows, method) : to_json(rows, method), a.out);
    } else if (*epsilon0) {
        const VectorDataset data = load(a);
        std::ostringstream os;
        os << std::setprecision(std::numeric_limits<double>::max_digits10)
           << find_epsilon0(data, parse_metric(a.metric), tol) << '\n';
        write_output(os.str(), a.out);
    } else if (*build) {
        const ExperimentConfig config = to_config(a);
        config.validate();
        const VectorDataset data = load(a);
        const DistanceEvaluator dist(data, config.metric);
        std::ostringstream os;
        write_graph(build_graph(dist, config, run_index), os);
        write_output(os.str(), a.out);
    } else if (*extend) {
        VectorDataset data = read_embeddings(a.input, sniff_embedding_format(a.input));
        const VectorDataset extra = read_embeddings(new_vectors, sniff_embedding_format(new_vectors));
        NeighborGraph graph = read_graph(graph_path);
        for (std::size_t i = 0; i < extra.size(); ++i) {
            graph = extend_incremental(graph, data, extra.row(i));
            data = data.with_row(extra.row(i));
        }
        std::ostringstream os;
        write_graph(graph, os);
        write_output(os.str(), a.out);
    } else if (*cluster) {
        const ExperimentConfig config = to_config(a);
        write_output(to_json(run_experiment(config)), a.out);
    } else if (*embed) {
        const ExperimentConfig config = to_config(a);
        config.validate();
        if (a.out.empty()) {
            throw ParameterError("embed needs --out");
        }
        const VectorDataset data = load(a);
        const DistanceEvaluator dist(data, config.metric);
        const NeighborGraph graph = build_graph(dist, config, 0);
        const AffinityMatrix affinity = config.affinity == AffinityKind::gaussian
                                            ? affinity_gaussian(graph, data, *config.t, config.kernel)
                                            : affinity_connection(graph);
        const SpectralEmbedding emb = laplacian_eigenmaps(affinity, dims);
        std::vector<float> values;
        values.reserve(data.size() * dims);
        for (Eigen::Index i = 0; i < emb.coordinates.rows(); ++i) {
            for (Eigen::Index j = 0; j < emb.coordinates.cols(); ++j) {
                values.push_back(static_cast<float>(emb.coordinates(i, j)));
            }
        }
        write_embeddings(VectorDataset(data.size(), dims, std::move(values)), a.out);
        std::ostringstream os;
        os << std::setprecision(std::numeric_limits<double>::max_digits10);
        for (double ev : emb.eigenvalues) {
            os << ev << '\n';
        }
        write_output(os.str(), a.out + ".eigenvalues.txt");
    } else if (*sweep) {
        ExperimentConfig config = to_config([&] {
            CommonArgs single = a;
            single.k = a.k.empty() ? std::vector<double>{} : std::vector<double>{a.k.front()};
            return single;
        }());
        if (a.k.empty()) {
            throw ParameterError("k sweep needs at least one k value");
        }
        std::vector<std::size_t> ks;
        for (double k : a.k) {
            ks.push_back(as_k(k));
        }
        const VectorDataset data = load_dataset(config);
        write_output(to_json(sweep_k(config, data, ks)), a.out);
    } else if (*baseline) {
        const VectorDataset data = load(a);
        const std::size_t c = a.clusters > 0 ? a.clusters : data.labels()->num_classes();
        write_output(to_json(baseline_kmeans_hd(data, c, a.seed, a.beta)), a.out);
    } else if (*stats) {
        const VectorDataset data = load(a);
        NeighborGraph graph;
        if (!graph_path.empty()) {
            graph = read_graph(graph_path);
        } else {
            const ExperimentConfig config = to_config(a);
            config.validate();
            graph = build_graph(DistanceEvaluator(data, config.metric), config, 0);
        }
        std::vector<int> labels;
        if (data.labels()) {
            labels = data.labels()->ids;
        }
        StatsOptions options;
        options.target_halfwidth = halfwidth;
        options.node_threshold = node_threshold;
        StatsReport report = estimate_stats_mc(graph, labels, a.seed, options);
        if (!texts.empty()) {
            report.documents = document_stats(read_texts(texts));
        }
        write_output(to_json(report), a.out);
    } else if (*merge) {
        std::vector<std::string> texts_in;
        for (const auto& path : reports) {
            texts_in.push_back(read_file(path));
        }
        write_output(merge_reports(texts_in), a.out);
    } else if (*synth) {
        const VectorDataset data = make_blobs(spec);
        write_embeddings(data, a.out);
        std::ostringstream os;
        for (int id : data.labels()->ids) {
            os << data.labels()->names[static_cast<std::size_t>(id)] << '\n';
        }
        write_output(os.str(), labels_out);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ParameterError& e) {
        std::cerr << "parameter error: " << e.what() << '\n';
        return kExitParameter;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const UndefinedStatistic& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    }
}
