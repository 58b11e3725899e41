#pragma once

#include "nbgraph/graph.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace nbgraph {

enum class AffinityKind { connection, gaussian };

/// Distance fed to the Gaussian kernel. `normalized_euclidean` scales each
/// vector to unit length first, which matches cosine-built graphs.
enum class KernelDistance { euclidean, normalized_euclidean };

/// Symmetric, nonnegative, zero-diagonal weights in [0, 1].
struct AffinityMatrix {
    SparseMatrix weights;
    AffinityKind kind = AffinityKind::connection;
    double t = 0.0;

    std::size_t size() const noexcept { return static_cast<std::size_t>(weights.rows()); }
};

/// (A + A^T) / 2 on the 0/1 adjacency.
AffinityMatrix affinity_connection(const NeighborGraph& graph);

/// exp(-|x_i - x_j|^2 / (4t)) on the support of A or A^T.
AffinityMatrix affinity_gaussian(const NeighborGraph& graph, const VectorDataset& data, double t,
                                 KernelDistance kernel = KernelDistance::normalized_euclidean);

/// Connected components of the affinity support.
ComponentLabels affinity_components(const AffinityMatrix& affinity);

struct SpectralEmbedding {
    /// N x m, column j is the generalized eigenvector for eigenvalues[j].
    Eigen::MatrixXd coordinates;
    std::vector<double> eigenvalues;
    bool dropped_constant = false;
    /// Subspace iterations used; 0 on the dense path.
    std::size_t iterations = 0;
    /// Components of the affinity; > 1 only for the per-component fallback.
    std::size_t components = 1;

    std::size_t dims() const noexcept { return static_cast<std::size_t>(coordinates.cols()); }
};

struct EigenSolverOptions {
    double tolerance = 1e-8;
    std::size_t max_iterations = 5000;
    /// Graphs with at most this many nodes use a dense eigensolver.
    std::size_t dense_limit = 512;
};

/// Laplacian eigenmaps on the generalized problem L f = lambda D f with
/// L = D - W. The lambda = 0 constant vector is checked and dropped; the
/// next m eigenvectors are returned, D-orthonormal, sign-normalized so the
/// largest-magnitude entry is positive. Throws DisconnectedGraphError when
/// the affinity has more than one component.
SpectralEmbedding laplacian_eigenmaps(const AffinityMatrix& affinity, std::size_t m,
                                      const EigenSolverOptions& options = {});

/// Embedding for affinities that may be disconnected. The zero eigenspace
/// is represented by component indicators (largest components first),
/// orthogonalized against the constant vector; remaining dimensions come
/// from the smallest nonzero eigenpairs. Equal to laplacian_eigenmaps on
/// connected input.
SpectralEmbedding laplacian_eigenmaps_per_component(const AffinityMatrix& affinity, std::size_t m,
                                                    const EigenSolverOptions& options = {});

/// Full generalized spectrum, ascending, by dense decomposition. Isolated
/// nodes contribute a zero eigenvalue each.
std::vector<double> laplacian_spectrum(const AffinityMatrix& affinity);

struct KMeansOptions {
    std::size_t restarts = 10;
    std::size_t max_iterations = 300;
    double relative_tolerance = 1e-6;
};

struct KMeansResult {
    std::vector<int> labels;
    double inertia = 0.0;
    /// Objective after every assignment step of the winning restart.
    std::vector<double> history;
    /// All points coincide; every label is 0.
    bool degenerate = false;
};

/// Lloyd's algorithm with k-means++ seeding over the rows of `points`.
KMeansResult kmeans(const Eigen::MatrixXd& points, std::size_t clusters, std::uint64_t seed,
                    const KMeansOptions& options = {});

std::vector<int> kmeans_assign(const SpectralEmbedding& embedding, std::size_t clusters,
                               std::uint64_t seed);

/// Seedless assignment: column-pivoted QR of the transposed embedding picks
/// one representative row per cluster, then every row goes to the
/// representative direction it aligns with most after a polar rotation.
std::vector<int> qr_assign(const SpectralEmbedding& embedding, std::size_t clusters);
std::vector<int> qr_assign(const Eigen::MatrixXd& coordinates, std::size_t clusters);

} // namespace nbgraph
