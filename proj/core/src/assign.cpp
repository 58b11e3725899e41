#include <cmath>
#include "nbgraph/spectral.hpp"

#include "nbgraph/construction.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <limits>
#include <random>

namespace nbgraph {

namespace {

using Eigen::MatrixXd;

double squared_distance(const MatrixXd& points, Eigen::Index row, const MatrixXd& centers,
                        Eigen::Index c) {
    return (points.row(row) - centers.row(c)).squaredNorm();
}

// k-means++ seeding. When fewer than `clusters` distinct points exist the
// remaining centers are filled with unused rows.
MatrixXd seed_centers(const MatrixXd& points, std::size_t clusters, std::mt19937_64& rng) {
    const Eigen::Index n = points.rows();
    MatrixXd centers(static_cast<Eigen::Index>(clusters), points.cols());
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    Eigen::Index first = pick(rng);
    centers.row(0) = points.row(first);
    used[static_cast<std::size_t>(first)] = true;
    std::vector<double> nearest(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        nearest[static_cast<std::size_t>(i)] = squared_distance(points, i, centers, 0);
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t c = 1; c < clusters; ++c) {
        double total = 0.0;
        for (double d : nearest) {
            total += d;
        }
        Eigen::Index chosen = -1;
        if (total > 0.0) {
            double target = unit(rng) * total;
            for (Eigen::Index i = 0; i < n; ++i) {
                target -= nearest[static_cast<std::size_t>(i)];
                if (target <= 0.0 && nearest[static_cast<std::size_t>(i)] > 0.0) {
                    chosen = i;
                    break;
                }
            }
            if (chosen < 0) {
                for (Eigen::Index i = n - 1; i >= 0; --i) {
                    if (nearest[static_cast<std::size_t>(i)] > 0.0) {
                        chosen = i;
                        break;
                    }
                }
            }
        } else {
            for (Eigen::Index i = 0; i < n; ++i) {
                if (!used[static_cast<std::size_t>(i)]) {
                    chosen = i;
                    break;
                }
            }
        }
        const auto ci = static_cast<Eigen::Index>(c);
        centers.row(ci) = points.row(chosen);
        used[static_cast<std::size_t>(chosen)] = true;
        for (Eigen::Index i = 0; i < n; ++i) {
            nearest[static_cast<std::size_t>(i)] =
                std::min(nearest[static_cast<std::size_t>(i)], squared_distance(points, i, centers, ci));
        }
    }
    return centers;
}

struct LloydRun {
    std::vector<int> labels;
    double inertia = 0.0;
    std::vector<double> history;
};

LloydRun lloyd(const MatrixXd& points, MatrixXd centers, const KMeansOptions& options) {
    const Eigen::Index n = points.rows();
    const Eigen::Index k = centers.rows();
    LloydRun run;
    run.labels.assign(static_cast<std::size_t>(n), 0);
    std::vector<double> cost(static_cast<std::size_t>(n), 0.0);
    for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
        std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (Eigen::Index c = 0; c < k; ++c) {
                const double d = squared_distance(points, i, centers, c);
                if (d < best_d) {
                    best_d = d;
                    best = static_cast<int>(c);
                }
            }
            run.labels[static_cast<std::size_t>(i)] = best;
            cost[static_cast<std::size_t>(i)] = best_d;
            ++sizes[static_cast<std::size_t>(best)];
        }
        // Reseed empty clusters with the point farthest from its center,
        // taken from a cluster that can spare it.
        for (Eigen::Index c = 0; c < k; ++c) {
            if (sizes[static_cast<std::size_t>(c)] != 0) {
                continue;
            }
            Eigen::Index far = -1;
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto owner = static_cast<std::size_t>(run.labels[static_cast<std::size_t>(i)]);
                if (sizes[owner] > 1 &&
                    (far < 0 || cost[static_cast<std::size_t>(i)] > cost[static_cast<std::size_t>(far)])) {
                    far = i;
                }
            }
            if (far < 0) {
                break;
            }
            --sizes[static_cast<std::size_t>(run.labels[static_cast<std::size_t>(far)])];
            run.labels[static_cast<std::size_t>(far)] = static_cast<int>(c);
            ++sizes[static_cast<std::size_t>(c)];
            centers.row(c) = points.row(far);
            cost[static_cast<std::size_t>(far)] = 0.0;
        }
        double inertia = 0.0;
        for (double v : cost) {
            inertia += v;
        }
        const bool converged =
            !run.history.empty() &&
            run.history.back() - inertia <= options.relative_tolerance * run.history.back();
        run.history.push_back(inertia);
        run.inertia = inertia;
        if (converged) {
            break;
        }
        centers.setZero();
        for (Eigen::Index i = 0; i < n; ++i) {
            centers.row(run.labels[static_cast<std::size_t>(i)]) += points.row(i);
        }
        for (Eigen::Index c = 0; c < k; ++c) {
            centers.row(c) /= static_cast<double>(sizes[static_cast<std::size_t>(c)]);
        }
    }
    return run;
}

} // namespace

KMeansResult kmeans(const MatrixXd& points, std::size_t clusters, std::uint64_t seed,
                    const KMeansOptions& options) {
    const auto n = static_cast<std::size_t>(points.rows());
    if (clusters < 1 || clusters > n) {
        throw ParameterError("cluster count must be in [1, N]; got " + std::to_string(clusters));
    }
    KMeansResult result;
    const bool identical =
        n == 0 || ((points.rowwise() - points.row(0)).cwiseAbs().maxCoeff() == 0.0);
    if (clusters == 1 || identical) {
        result.labels.assign(n, 0);
        result.inertia = (points.rowwise() - points.colwise().mean()).squaredNorm();
        result.history = {result.inertia};
        result.degenerate = identical && clusters > 1;
        return result;
    }
    bool have = false;
    for (std::size_t r = 0; r < std::max<std::size_t>(1, options.restarts); ++r) {
        std::mt19937_64 rng(derive_seed(seed, r));
        LloydRun run = lloyd(points, seed_centers(points, clusters, rng), options);
        if (!have || run.inertia < result.inertia) {
            result.labels = std::move(run.labels);
            result.inertia = run.inertia;
            result.history = std::move(run.history);
            have = true;
        }
    }
    return result;
}

std::vector<int> kmeans_assign(const SpectralEmbedding& embedding, std::size_t clusters,
                               std::uint64_t seed) {
    return kmeans(embedding.coordinates, clusters, seed).labels;
}

std::vector<int> qr_assign(const SpectralEmbedding& embedding, std::size_t clusters) {
    if (!embedding.dropped_constant) {
        return qr_assign(embedding.coordinates, clusters);
    }
    // The cluster indicator space includes the trivial eigenvector; put it back
    // as column 0 with a scale comparable to the kept columns.
    const MatrixXd& f = embedding.coordinates;
    const auto k = static_cast<Eigen::Index>(clusters);
    if (clusters < 1 || f.cols() < k - 1) {
        throw ParameterError("qr_assign needs at least " + std::to_string(clusters) +
                             " embedding dimensions");
    }
    const Eigen::Index n = f.rows();
    const double scale = f.cols() > 0 && f.col(0).norm() > 0.0 ? f.col(0).norm() : 1.0;
    MatrixXd y(n, k);
    y.col(0).setConstant(n > 0 ? scale / std::sqrt(static_cast<double>(n)) : 0.0);
    y.rightCols(k - 1) = f.leftCols(k - 1);
    return qr_assign(y, clusters);
}

std::vector<int> qr_assign(const MatrixXd& coordinates, std::size_t clusters) {
    const auto k = static_cast<Eigen::Index>(clusters);
    if (clusters < 1 || coordinates.cols() < k) {
        throw ParameterError("qr_assign needs at least " + std::to_string(clusters) +
                             " embedding dimensions");
    }
    if (coordinates.rows() < k) {
        throw ParameterError("qr_assign needs at least as many points as clusters");
    }
    const MatrixXd y = coordinates.leftCols(k);
    Eigen::ColPivHouseholderQR<MatrixXd> qr(y.transpose());
    const MatrixXd r = qr.matrixQR().topRows(k).template triangularView<Eigen::Upper>();
    const double lead = std::abs(r(0, 0));
    const double tail = std::abs(r(k - 1, k - 1));
    if (!(lead > 0.0) || tail < 1e-8 * lead) {
        throw NumericalError("embedding is numerically rank deficient for " +
                             std::to_string(clusters) + " clusters");
    }
    const auto& perm = qr.colsPermutation().indices();
    MatrixXd reps(k, k);
    for (Eigen::Index j = 0; j < k; ++j) {
        reps.row(j) = y.row(perm(j));
    }
    // Polar factor of reps^T rotates representative rows onto the axes.
    Eigen::JacobiSVD<MatrixXd> svd(reps.transpose(), Eigen::ComputeFullU | Eigen::ComputeFullV);
    const MatrixXd rotation = svd.matrixU() * svd.matrixV().transpose();
    const MatrixXd aligned = (y * rotation).cwiseAbs();
    std::vector<int> labels(static_cast<std::size_t>(y.rows()));
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
        Eigen::Index arg = 0;
        aligned.row(i).maxCoeff(&arg);
        labels[static_cast<std::size_t>(i)] = static_cast<int>(arg);
    }
    return labels;
}

} // namespace nbgraph
