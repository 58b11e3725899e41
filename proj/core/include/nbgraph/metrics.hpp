#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nbgraph {

/// Joint counts of true class (rows) and predicted cluster (columns).
/// Labels are compacted to dense ids in first-appearance order.
struct ContingencyTable {
    std::vector<std::vector<std::size_t>> counts;
    std::vector<std::size_t> class_totals;
    std::vector<std::size_t> cluster_totals;
    std::size_t total = 0;

    static ContingencyTable build(std::span<const int> truth, std::span<const int> predicted);
};

struct ClusterScores {
    double homogeneity = 0.0;
    double completeness = 0.0;
    double v_measure = 0.0;
};

struct HomogeneityCompleteness {
    double homogeneity = 0.0;
    double completeness = 0.0;
};

/// h = 1 - H(C|K)/H(C), c = 1 - H(K|C)/H(K), entropies in nats; a zero
/// marginal entropy gives a score of 1.
HomogeneityCompleteness homogeneity_completeness(std::span<const int> truth,
                                                 std::span<const int> predicted);

/// (1 + beta) h c / (beta h + c), 0 when h and c are both 0.
double v_measure(double homogeneity, double completeness, double beta = 1.0);
double v_measure(std::span<const int> truth, std::span<const int> predicted, double beta = 1.0);

ClusterScores score_clustering(std::span<const int> truth, std::span<const int> predicted,
                               double beta = 1.0);

} // namespace nbgraph
