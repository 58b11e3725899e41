#include "nbgraph/pipeline.hpp"

#include <json.hpp>

#include <map>

namespace nbgraph {

namespace {

using Json = nlohmann::ordered_json;

Json estimate_json(const Estimate& e) {
    Json j;
    if (e.undefined) {
        j["value"] = nullptr;
        j["undefined"] = *e.undefined;
        return j;
    }
    j["value"] = e.value;
    j["sampled"] = e.sampled;
    if (e.sampled) {
        j["ci95_halfwidth"] = e.ci_halfwidth;
        j["samples"] = e.samples;
        j["converged"] = e.converged;
    }
    return j;
}

Estimate estimate_from(const Json& j) {
    Estimate e;
    if (j.contains("undefined")) {
        e.undefined = j.at("undefined").get<std::string>();
        return e;
    }
    e.value = j.at("value").get<double>();
    e.sampled = j.at("sampled").get<bool>();
    if (e.sampled) {
        e.ci_halfwidth = j.at("ci95_halfwidth").get<double>();
        e.samples = j.at("samples").get<std::size_t>();
        e.converged = j.at("converged").get<bool>();
    }
    return e;
}

Json stats_json(const StatsReport& s) {
    Json j;
    j["nodes"] = s.nodes;
    j["edges"] = s.edges;
    j["density"] = estimate_json(s.density);
    j["assortativity"] = estimate_json(s.assortativity);
    j["transitivity"] = estimate_json(s.transitivity);
    j["avg_local_clustering"] = estimate_json(s.avg_local_clustering);
    j["homophily"] = estimate_json(s.homophily);
    j["pagerank"] = {{"mean", s.pagerank.mean}, {"max", s.pagerank.max},
                     {"entropy", s.pagerank.entropy}};
    if (s.documents) {
        j["documents"] = {{"avg_words", s.documents->avg_words},
                          {"avg_sentences", s.documents->avg_sentences},
                          {"avg_characters", s.documents->avg_characters}};
    }
    return j;
}

StatsReport stats_from(const Json& j) {
    StatsReport s;
    s.nodes = j.at("nodes").get<std::size_t>();
    s.edges = j.at("edges").get<std::size_t>();
    s.density = estimate_from(j.at("density"));
    s.assortativity = estimate_from(j.at("assortativity"));
    s.transitivity = estimate_from(j.at("transitivity"));
    s.avg_local_clustering = estimate_from(j.at("avg_local_clustering"));
    s.homophily = estimate_from(j.at("homophily"));
    const Json& pr = j.at("pagerank");
    s.pagerank = {pr.at("mean").get<double>(), pr.at("max").get<double>(),
                  pr.at("entropy").get<double>()};
    if (j.contains("documents")) {
        const Json& d = j.at("documents");
        s.documents = DocumentStats{d.at("avg_words").get<double>(), d.at("avg_sentences").get<double>(),
                                    d.at("avg_characters").get<double>()};
    }
    return s;
}

Json components_json(const ComponentReport& c) {
    return {{"num_components", c.num_components},
            {"max_component_size", c.max_component_size},
            {"graph_edges", c.graph_edges},
            {"digraph_edges", c.digraph_edges}};
}

ComponentReport components_from(const Json& j) {
    return {j.at("num_components").get<std::size_t>(), j.at("max_component_size").get<std::size_t>(),
            j.at("graph_edges").get<std::size_t>(), j.at("digraph_edges").get<std::size_t>()};
}

Json config_json(const ExperimentConfig& c) {
    Json j;
    j["input"] = c.input;
    j["labels"] = c.labels;
    j["method"] = to_string(c.method);
    j["k"] = c.k ? Json(*c.k) : Json(nullptr);
    j["epsilon"] = c.epsilon ? Json(*c.epsilon) : Json(nullptr);
    j["metric"] = to_string(c.metric);
    j["affinity"] = to_string(c.affinity);
    j["t"] = c.t ? Json(*c.t) : Json(nullptr);
    j["kernel"] = c.kernel == KernelDistance::euclidean ? "euclidean" : "normalized_euclidean";
    j["assign"] = to_string(c.assigner);
    j["clusters"] = c.clusters;
    j["repeats"] = c.repeats;
    j["seed"] = c.seed;
    j["beta"] = c.beta;
    j["disconnected"] = to_string(c.disconnected);
    j["stats"] = c.with_stats;
    return j;
}

ExperimentConfig config_from(const Json& j) {
    ExperimentConfig c;
    c.input = j.at("input").get<std::string>();
    c.labels = j.at("labels").get<std::string>();
    c.method = parse_method(j.at("method").get<std::string>());
    if (!j.at("k").is_null()) {
        c.k = j.at("k").get<std::size_t>();
    }
    if (!j.at("epsilon").is_null()) {
        c.epsilon = j.at("epsilon").get<double>();
    }
    c.metric = parse_metric(j.at("metric").get<std::string>());
    c.affinity = parse_affinity(j.at("affinity").get<std::string>());
    if (!j.at("t").is_null()) {
        c.t = j.at("t").get<double>();
    }
    c.kernel = j.at("kernel").get<std::string>() == "euclidean" ? KernelDistance::euclidean
                                                                 : KernelDistance::normalized_euclidean;
    c.assigner = parse_assigner(j.at("assign").get<std::string>());
    c.clusters = j.at("clusters").get<std::size_t>();
    c.repeats = j.at("repeats").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.beta = j.at("beta").get<double>();
    c.disconnected = parse_disconnected_policy(j.at("disconnected").get<std::string>());
    c.with_stats = j.at("stats").get<bool>();
    return c;
}

Json aggregate_json(const Aggregate& a) {
    Json j;
    j["mean"] = a.mean;
    if (a.stddev) {
        j["std"] = *a.stddev;
    }
    return j;
}

Aggregate aggregate_from(const Json& j) {
    Aggregate a;
    a.mean = j.at("mean").get<double>();
    if (j.contains("std")) {
        a.stddev = j.at("std").get<double>();
    }
    return a;
}

Json run_json(const RunRecord& r) {
    Json j;
    j["run"] = r.run;
    if (r.ordering_seed) {
        j["ordering_seed"] = *r.ordering_seed;
    }
    j["components"] = components_json(r.components);
    j["disconnected"] = r.disconnected;
    j["scored"] = r.scored;
    if (r.scores) {
        j["homogeneity"] = r.scores->homogeneity;
        j["completeness"] = r.scores->completeness;
        j["v_measure"] = r.scores->v_measure;
    }
    j["eigen_iterations"] = r.eigen_iterations;
    if (r.diagnostic) {
        j["diagnostic"] = *r.diagnostic;
    }
    if (r.times) {
        j["times_ms"] = {{"build", r.times->build_ms},
                         {"affinity", r.times->affinity_ms},
                         {"embed", r.times->embed_ms},
                         {"assign", r.times->assign_ms}};
    }
    return j;
}

RunRecord run_from(const Json& j) {
    RunRecord r;
    r.run = j.at("run").get<std::size_t>();
    if (j.contains("ordering_seed")) {
        r.ordering_seed = j.at("ordering_seed").get<std::uint64_t>();
    }
    r.components = components_from(j.at("components"));
    r.disconnected = j.at("disconnected").get<bool>();
    r.scored = j.at("scored").get<bool>();
    if (j.contains("v_measure")) {
        r.scores = ClusterScores{j.at("homogeneity").get<double>(), j.at("completeness").get<double>(),
                                 j.at("v_measure").get<double>()};
    }
    r.eigen_iterations = j.at("eigen_iterations").get<std::size_t>();
    if (j.contains("diagnostic")) {
        r.diagnostic = j.at("diagnostic").get<std::string>();
    }
    if (j.contains("times_ms")) {
        const Json& t = j.at("times_ms");
        r.times = StageTimes{t.at("build").get<double>(), t.at("affinity").get<double>(),
                             t.at("embed").get<double>(), t.at("assign").get<double>()};
    }
    return r;
}

Json report_json(const RunReport& r) {
    Json j;
    j["format"] = r.format;
    j["dataset"] = r.dataset;
    j["points"] = r.points;
    j["dim"] = r.dim;
    j["clusters"] = r.clusters;
    j["method"] = r.method;
    j["config"] = config_json(r.config);
    j["scored_runs"] = r.scored_runs;
    j["disconnected_runs"] = r.disconnected_runs;
    j["v_measure"] = aggregate_json(r.v_measure);
    j["homogeneity"] = aggregate_json(r.homogeneity);
    j["completeness"] = aggregate_json(r.completeness);
    Json runs = Json::array();
    for (const auto& run : r.runs) {
        runs.push_back(run_json(run));
    }
    j["runs"] = std::move(runs);
    if (r.stats) {
        j["stats"] = stats_json(*r.stats);
    }
    return j;
}

RunReport report_from(const Json& j) {
    RunReport r;
    r.format = j.at("format").get<std::string>();
    if (r.format != kRunReportFormat) {
        throw FormatError("unsupported report format '" + r.format + "'");
    }
    r.dataset = j.at("dataset").get<std::string>();
    r.points = j.at("points").get<std::size_t>();
    r.dim = j.at("dim").get<std::size_t>();
    r.clusters = j.at("clusters").get<std::size_t>();
    r.method = j.at("method").get<std::string>();
    r.config = config_from(j.at("config"));
    r.scored_runs = j.at("scored_runs").get<std::size_t>();
    r.disconnected_runs = j.at("disconnected_runs").get<std::size_t>();
    r.v_measure = aggregate_from(j.at("v_measure"));
    r.homogeneity = aggregate_from(j.at("homogeneity"));
    r.completeness = aggregate_from(j.at("completeness"));
    for (const auto& run : j.at("runs")) {
        r.runs.push_back(run_from(run));
    }
    if (j.contains("stats")) {
        r.stats = stats_from(j.at("stats"));
    }
    return r;
}

Json parse(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw FormatError(std::string("invalid JSON: ") + e.what());
    }
}

} // namespace

std::string to_json(const RunReport& report) { return report_json(report).dump(2) + "\n"; }

std::string to_json(const SweepReport& report) {
    Json j;
    j["format"] = report.format;
    j["k_values"] = report.k_values;
    Json curve = Json::array();
    Json by_k = Json::object();
    for (std::size_t i = 0; i < report.reports.size(); ++i) {
        const RunReport& r = report.reports[i];
        Json point;
        point["k"] = report.k_values[i];
        point["v_measure"] = r.v_measure.mean;
        if (r.v_measure.stddev) {
            point["v_measure_std"] = *r.v_measure.stddev;
        }
        point["disconnected_runs"] = r.disconnected_runs;
        curve.push_back(std::move(point));
        by_k[std::to_string(report.k_values[i])] = report_json(r);
    }
    j["curve"] = std::move(curve);
    j["reports"] = std::move(by_k);
    return j.dump(2) + "\n";
}

std::string to_json(const std::vector<ComponentRow>& rows, Method method) {
    Json j;
    j["format"] = "nbgraph.components/1";
    j["method"] = to_string(method);
    j["parameter"] = uses_k(method) ? "k" : "epsilon";
    Json arr = Json::array();
    for (const auto& row : rows) {
        Json r = components_json(row.report);
        r["parameter"] = row.parameter;
        arr.push_back(std::move(r));
    }
    j["rows"] = std::move(arr);
    return j.dump(2) + "\n";
}

std::string to_json(const StatsReport& report) { return stats_json(report).dump(2) + "\n"; }

RunReport run_report_from_json(const std::string& text) {
    try {
        return report_from(parse(text));
    } catch (const Json::exception& e) {
        throw FormatError(std::string("malformed run report: ") + e.what());
    }
}

std::string merge_reports(const std::vector<std::string>& reports) {
    if (reports.empty()) {
        throw ParameterError("nothing to merge");
    }
    std::vector<RunReport> parsed;
    parsed.reserve(reports.size());
    for (const auto& text : reports) {
        parsed.push_back(run_report_from_json(text));
    }
    Json j;
    j["format"] = kMergedReportFormat;
    j["method"] = parsed.front().method;
    j["partitions"] = parsed.size();
    double v = 0.0;
    double h = 0.0;
    double c = 0.0;
    double v_std = 0.0;
    std::size_t with_std = 0;
    Json parts = Json::array();
    for (const auto& r : parsed) {
        if (r.method != parsed.front().method) {
            throw ParameterError("cannot merge reports of different methods: " + r.method + " vs " +
                                 parsed.front().method);
        }
        v += r.v_measure.mean;
        h += r.homogeneity.mean;
        c += r.completeness.mean;
        if (r.v_measure.stddev) {
            v_std += *r.v_measure.stddev;
            ++with_std;
        }
        parts.push_back({{"dataset", r.dataset},
                         {"points", r.points},
                         {"v_measure", r.v_measure.mean},
                         {"disconnected_runs", r.disconnected_runs}});
    }
    const double n = static_cast<double>(parsed.size());
    j["v_measure"] = v / n;
    j["homogeneity"] = h / n;
    j["completeness"] = c / n;
    if (with_std > 0) {
        j["mean_v_measure_std"] = v_std / static_cast<double>(with_std);
    }
    j["inputs"] = std::move(parts);
    return j.dump(2) + "\n";
}

} // namespace nbgraph
