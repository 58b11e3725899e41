#include "nbgraph/metrics.hpp"

#include "nbgraph/errors.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace nbgraph {

namespace {

std::vector<std::size_t> compact(std::span<const int> labels, std::size_t& distinct) {
    std::unordered_map<int, std::size_t> ids;
    std::vector<std::size_t> out;
    out.reserve(labels.size());
    for (int l : labels) {
        auto [it, inserted] = ids.try_emplace(l, ids.size());
        out.push_back(it->second);
    }
    distinct = ids.size();
    return out;
}

double entropy(std::span<const std::size_t> totals, double n) {
    double h = 0.0;
    for (std::size_t c : totals) {
        if (c > 0) {
            const double p = static_cast<double>(c) / n;
            h -= p * std::log(p);
        }
    }
    return h;
}

} // namespace

ContingencyTable ContingencyTable::build(std::span<const int> truth, std::span<const int> predicted) {
    if (truth.size() != predicted.size()) {
        throw ParameterError("label vectors differ in length: " + std::to_string(truth.size()) +
                             " vs " + std::to_string(predicted.size()));
    }
    if (truth.empty()) {
        throw ParameterError("label vectors are empty");
    }
    std::size_t n_classes = 0;
    std::size_t n_clusters = 0;
    const auto cls = compact(truth, n_classes);
    const auto clu = compact(predicted, n_clusters);
    ContingencyTable t;
    t.counts.assign(n_classes, std::vector<std::size_t>(n_clusters, 0));
    t.class_totals.assign(n_classes, 0);
    t.cluster_totals.assign(n_clusters, 0);
    for (std::size_t i = 0; i < cls.size(); ++i) {
        ++t.counts[cls[i]][clu[i]];
        ++t.class_totals[cls[i]];
        ++t.cluster_totals[clu[i]];
    }
    t.total = truth.size();
    return t;
}

HomogeneityCompleteness homogeneity_completeness(std::span<const int> truth,
                                                 std::span<const int> predicted) {
    const ContingencyTable t = ContingencyTable::build(truth, predicted);
    const double n = static_cast<double>(t.total);
    const double h_c = entropy(t.class_totals, n);
    const double h_k = entropy(t.cluster_totals, n);
    // H(C|K) and H(K|C) from the joint table.
    double h_c_given_k = 0.0;
    double h_k_given_c = 0.0;
    for (std::size_t c = 0; c < t.counts.size(); ++c) {
        for (std::size_t k = 0; k < t.counts[c].size(); ++k) {
            const std::size_t nck = t.counts[c][k];
            if (nck == 0) {
                continue;
            }
            const double joint = static_cast<double>(nck) / n;
            h_c_given_k -= joint * std::log(static_cast<double>(nck) / static_cast<double>(t.cluster_totals[k]));
            h_k_given_c -= joint * std::log(static_cast<double>(nck) / static_cast<double>(t.class_totals[c]));
        }
    }
    HomogeneityCompleteness out;
    out.homogeneity = h_c == 0.0 ? 1.0 : std::clamp(1.0 - h_c_given_k / h_c, 0.0, 1.0);
    out.completeness = h_k == 0.0 ? 1.0 : std::clamp(1.0 - h_k_given_c / h_k, 0.0, 1.0);
    return out;
}

double v_measure(double homogeneity, double completeness, double beta) {
    if (!(beta >= 0.0)) {
        throw ParameterError("beta must be nonnegative");
    }
    const double denom = beta * homogeneity + completeness;
    if (denom == 0.0) {
        return 0.0;
    }
    return (1.0 + beta) * homogeneity * completeness / denom;
}

double v_measure(std::span<const int> truth, std::span<const int> predicted, double beta) {
    const auto hc = homogeneity_completeness(truth, predicted);
    return v_measure(hc.homogeneity, hc.completeness, beta);
}

ClusterScores score_clustering(std::span<const int> truth, std::span<const int> predicted,
                               double beta) {
    const auto hc = homogeneity_completeness(truth, predicted);
    return {hc.homogeneity, hc.completeness, v_measure(hc.homogeneity, hc.completeness, beta)};
}

} // namespace nbgraph
