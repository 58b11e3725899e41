#pragma once

#include "nbgraph/construction.hpp"
#include "nbgraph/graph_stats.hpp"
#include "nbgraph/metrics.hpp"
#include "nbgraph/spectral.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nbgraph {

inline constexpr const char* kRunReportFormat = "nbgraph.run/1";
inline constexpr const char* kSweepReportFormat = "nbgraph.sweep/1";
inline constexpr const char* kMergedReportFormat = "nbgraph.merged/1";

enum class Method { knn, inc_knn, epsilon, inc_knn_mst, knn_mst };
enum class Assigner { kmeans, qr };
/// What to do with a run whose graph is disconnected.
enum class DisconnectedPolicy { fallback, skip };

std::string to_string(Method method);
std::string to_string(Assigner assigner);
std::string to_string(AffinityKind kind);
std::string to_string(DisconnectedPolicy policy);
Method parse_method(const std::string& text);
Assigner parse_assigner(const std::string& text);
AffinityKind parse_affinity(const std::string& text);
DisconnectedPolicy parse_disconnected_policy(const std::string& text);

bool uses_k(Method method);

struct ExperimentConfig {
    std::string input;
    std::string labels;
    Method method = Method::inc_knn;
    std::optional<std::size_t> k;
    std::optional<double> epsilon;
    Metric metric = Metric::cosine;
    AffinityKind affinity = AffinityKind::connection;
    std::optional<double> t;
    KernelDistance kernel = KernelDistance::normalized_euclidean;
    Assigner assigner = Assigner::qr;
    /// 0 means "number of label classes".
    std::size_t clusters = 0;
    std::size_t repeats = 1;
    std::uint64_t seed = 0;
    double beta = 1.0;
    DisconnectedPolicy disconnected = DisconnectedPolicy::fallback;
    bool with_stats = true;
    bool timings = false;

    /// Throws ParameterError on contradictions (k with epsilon, missing t, ...).
    void validate() const;
};

struct StageTimes {
    double build_ms = 0.0;
    double affinity_ms = 0.0;
    double embed_ms = 0.0;
    double assign_ms = 0.0;
};

struct RunRecord {
    std::size_t run = 0;
    /// Seed of the node ordering (incremental methods only).
    std::optional<std::uint64_t> ordering_seed;
    ComponentReport components;
    bool disconnected = false;
    bool scored = true;
    std::optional<std::string> diagnostic;
    std::optional<ClusterScores> scores;
    std::size_t eigen_iterations = 0;
    std::optional<StageTimes> times;
};

struct Aggregate {
    double mean = 0.0;
    std::optional<double> stddev;
};

struct RunReport {
    std::string format = kRunReportFormat;
    std::string dataset;
    std::size_t points = 0;
    std::size_t dim = 0;
    std::size_t clusters = 0;
    /// Either a graph method name or "kmeans_hd".
    std::string method;
    ExperimentConfig config;
    std::vector<RunRecord> runs;
    std::size_t scored_runs = 0;
    std::size_t disconnected_runs = 0;
    Aggregate v_measure;
    Aggregate homogeneity;
    Aggregate completeness;
    std::optional<StatsReport> stats;
};

struct SweepReport {
    std::string format = kSweepReportFormat;
    std::vector<std::size_t> k_values;
    std::vector<RunReport> reports;
};

struct ComponentRow {
    /// k for k-NN methods, epsilon otherwise.
    double parameter = 0.0;
    ComponentReport report;
};

/// Loads the dataset and labels named in the config.
VectorDataset load_dataset(const ExperimentConfig& config);

NeighborGraph build_graph(const DistanceEvaluator& dist, const ExperimentConfig& config,
                          std::size_t run);

RunReport run_experiment(const ExperimentConfig& config);
RunReport run_experiment(const ExperimentConfig& config, const VectorDataset& data);

SweepReport sweep_k(const ExperimentConfig& config, const VectorDataset& data,
                    const std::vector<std::size_t>& k_values);

RunReport baseline_kmeans_hd(const VectorDataset& data, std::size_t clusters, std::uint64_t seed,
                             double beta = 1.0);

std::vector<ComponentRow> report_components(const VectorDataset& data, Method method, Metric metric,
                                            const std::vector<double>& parameters,
                                            std::uint64_t seed = 0);

/// Epsilon values at eps0 -10%, -5%, 0, +5%, +10%.
std::vector<double> epsilon_table_parameters(double epsilon0);

// JSON (schema documented in docs/report_schema.md).
std::string to_json(const RunReport& report);
std::string to_json(const SweepReport& report);
std::string to_json(const std::vector<ComponentRow>& rows, Method method);
std::string to_json(const StatsReport& report);
RunReport run_report_from_json(const std::string& text);

/// Averages several run reports (e.g. partitions of one data source).
std::string merge_reports(const std::vector<std::string>& reports);

} // namespace nbgraph
