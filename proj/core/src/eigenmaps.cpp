#include "nbgraph/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace nbgraph {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Shift keeping L_sym + shift*I positive definite while leaving the small
// end of the spectrum well separated after inversion.
constexpr double kShift = 1e-6;
// Penalty lifting the deflated directions out of the wanted range on the
// dense path; L_sym has spectrum in [0, 2].
constexpr double kDeflationPenalty = 10.0;
constexpr double kConstantCheck = 1e-6;

struct NormalizedLaplacian {
    SparseMatrix lsym;
    VectorXd sqrt_degree;
};

// L_sym = I - D^{-1/2} W D^{-1/2}. Isolated nodes get degree 1 so that
// their row of L_sym is zero and each contributes a zero eigenvalue.
NormalizedLaplacian normalized_laplacian(const AffinityMatrix& affinity) {
    const auto& w = affinity.weights;
    const Eigen::Index n = w.rows();
    VectorXd degree = VectorXd::Zero(n);
    for (Eigen::Index col = 0; col < w.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(w, col); it; ++it) {
            degree(it.row()) += it.value();
        }
    }
    NormalizedLaplacian out;
    out.sqrt_degree.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out.sqrt_degree(i) = degree(i) > 0.0 ? std::sqrt(degree(i)) : 1.0;
    }
    using Triplet = Eigen::Triplet<double, std::int64_t>;
    std::vector<Triplet> triplets;
    triplets.reserve(static_cast<std::size_t>(w.nonZeros() + n));
    for (Eigen::Index i = 0; i < n; ++i) {
        triplets.emplace_back(i, i, degree(i) > 0.0 ? 1.0 : 0.0);
    }
    for (Eigen::Index col = 0; col < w.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(w, col); it; ++it) {
            if (it.row() == col) {
                continue;
            }
            triplets.emplace_back(it.row(), col,
                                  -it.value() / (out.sqrt_degree(it.row()) * out.sqrt_degree(col)));
        }
    }
    out.lsym.resize(n, n);
    out.lsym.setFromTriplets(triplets.begin(), triplets.end());
    out.lsym.makeCompressed();
    return out;
}

struct Eigenpairs {
    VectorXd values;
    MatrixXd vectors;
    std::size_t iterations = 0;
};

// Orthonormal columns spanning `x` with every column orthogonal to `basis`.
MatrixXd orthonormalize_against(const MatrixXd& x, const MatrixXd& basis) {
    MatrixXd y = x;
    for (int pass = 0; pass < 2; ++pass) {
        if (basis.cols() > 0) {
            y -= basis * (basis.transpose() * y);
        }
        Eigen::HouseholderQR<MatrixXd> qr(y);
        y = qr.householderQ() * MatrixXd::Identity(y.rows(), y.cols());
    }
    return y;
}

// The `count` smallest eigenpairs of L_sym on the orthogonal complement of
// the orthonormal columns of `deflate`.
Eigenpairs smallest_dense(const SparseMatrix& lsym, const MatrixXd& deflate, std::size_t count) {
    MatrixXd dense = MatrixXd(lsym);
    if (deflate.cols() > 0) {
        dense += kDeflationPenalty * deflate * deflate.transpose();
    }
    dense = 0.5 * (dense + dense.transpose());
    Eigen::SelfAdjointEigenSolver<MatrixXd> solver(dense);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("dense eigensolver failed");
    }
    Eigenpairs out;
    const auto c = static_cast<Eigen::Index>(count);
    out.values = solver.eigenvalues().head(c);
    out.vectors = solver.eigenvectors().leftCols(c);
    return out;
}

// Block shift-invert subspace iteration with Rayleigh-Ritz extraction.
Eigenpairs smallest_sparse(const SparseMatrix& lsym, const MatrixXd& deflate, std::size_t count,
                           const EigenSolverOptions& options) {
    const Eigen::Index n = lsym.rows();
    const auto available = static_cast<std::size_t>(n - deflate.cols());
    const std::size_t block = std::min(available, std::max(2 * count + 4, count + 16));
    const auto nev = static_cast<Eigen::Index>(count);

    SparseMatrix shifted = lsym;
    for (Eigen::Index i = 0; i < n; ++i) {
        shifted.coeffRef(i, i) += kShift;
    }
    Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<std::int64_t>> ldlt;
    ldlt.compute(shifted);
    if (ldlt.info() != Eigen::Success) {
        throw NumericalError("factorization of the shifted Laplacian failed");
    }

    std::mt19937_64 rng(0x5eed5eedULL);
    std::normal_distribution<double> normal(0.0, 1.0);
    MatrixXd x(n, static_cast<Eigen::Index>(block));
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            x(i, j) = normal(rng);
        }
    }
    x = orthonormalize_against(x, deflate);

    Eigenpairs out;
    double worst = 0.0;
    for (std::size_t iter = 1; iter <= options.max_iterations; ++iter) {
        MatrixXd y = ldlt.solve(x);
        if (ldlt.info() != Eigen::Success) {
            throw NumericalError("shifted Laplacian solve failed");
        }
        x = orthonormalize_against(y, deflate);
        const MatrixXd ax = lsym * x;
        MatrixXd h = x.transpose() * ax;
        h = 0.5 * (h + h.transpose());
        Eigen::SelfAdjointEigenSolver<MatrixXd> ritz(h);
        x = x * ritz.eigenvectors();
        const MatrixXd ax_rot = ax * ritz.eigenvectors();
        const VectorXd theta = ritz.eigenvalues();
        worst = 0.0;
        for (Eigen::Index j = 0; j < nev; ++j) {
            worst = std::max(worst, (ax_rot.col(j) - theta(j) * x.col(j)).norm());
        }
        if (worst <= options.tolerance) {
            out.values = theta.head(nev);
            out.vectors = x.leftCols(nev);
            out.iterations = iter;
            return out;
        }
    }
    std::ostringstream msg;
    msg << "eigensolver did not converge in " << options.max_iterations
        << " iterations; worst residual " << worst << " (tolerance " << options.tolerance << ")";
    throw NumericalError(msg.str());
}

Eigenpairs smallest_restricted(const SparseMatrix& lsym, const MatrixXd& deflate, std::size_t count,
                               const EigenSolverOptions& options) {
    const auto n = static_cast<std::size_t>(lsym.rows());
    if (count == 0) {
        return {VectorXd(0), MatrixXd(lsym.rows(), 0), 0};
    }
    const std::size_t available = n - static_cast<std::size_t>(deflate.cols());
    if (n <= options.dense_limit || available < count + 8) {
        return smallest_dense(lsym, deflate, count);
    }
    return smallest_sparse(lsym, deflate, count, options);
}

void fix_sign(Eigen::Ref<VectorXd> v) {
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) {
        v = -v;
    }
}

// Turns eigenvectors of L_sym into D-orthonormal generalized eigenvectors.
SpectralEmbedding finish(const NormalizedLaplacian& lap, const MatrixXd& y,
                         const std::vector<double>& values, std::size_t iterations,
                         std::size_t components) {
    SpectralEmbedding emb;
    emb.coordinates = y;
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
        emb.coordinates.col(j) = y.col(j).cwiseQuotient(lap.sqrt_degree);
        fix_sign(emb.coordinates.col(j));
    }
    emb.eigenvalues = values;
    emb.dropped_constant = true;
    emb.iterations = iterations;
    emb.components = components;
    return emb;
}

void check_dims(std::size_t n, std::size_t m) {
    if (m < 1 || m + 1 > n) {
        throw ParameterError("embedding dimension must be in [1, n-1]; got m=" +
                             std::to_string(m) + " with n=" + std::to_string(n));
    }
}

VectorXd constant_direction(const NormalizedLaplacian& lap) {
    return lap.sqrt_degree.normalized();
}

void verify_null_vector(const NormalizedLaplacian& lap, const VectorXd& y0) {
    const double residual = (lap.lsym * y0).norm();
    if (!(residual <= kConstantCheck)) {
        std::ostringstream msg;
        msg << "constant vector is not in the Laplacian null space (residual " << residual << ")";
        throw NumericalError(msg.str());
    }
}

SpectralEmbedding connected_embedding(const NormalizedLaplacian& lap, std::size_t m,
                                      const EigenSolverOptions& options) {
    const VectorXd y0 = constant_direction(lap);
    verify_null_vector(lap, y0);
    const Eigenpairs pairs = smallest_restricted(lap.lsym, y0, m, options);
    std::vector<double> values(m);
    for (std::size_t j = 0; j < m; ++j) {
        values[j] = std::max(0.0, pairs.values(static_cast<Eigen::Index>(j)));
    }
    return finish(lap, pairs.vectors, values, pairs.iterations, 1);
}

} // namespace

SpectralEmbedding laplacian_eigenmaps(const AffinityMatrix& affinity, std::size_t m,
                                      const EigenSolverOptions& options) {
    check_dims(affinity.size(), m);
    const ComponentLabels comps = affinity_components(affinity);
    if (comps.count() > 1) {
        throw DisconnectedGraphError(comps.count());
    }
    return connected_embedding(normalized_laplacian(affinity), m, options);
}

SpectralEmbedding laplacian_eigenmaps_per_component(const AffinityMatrix& affinity, std::size_t m,
                                                    const EigenSolverOptions& options) {
    const std::size_t n = affinity.size();
    check_dims(n, m);
    const ComponentLabels comps = affinity_components(affinity);
    const NormalizedLaplacian lap = normalized_laplacian(affinity);
    if (comps.count() == 1) {
        return connected_embedding(lap, m, options);
    }
    const std::size_t c = comps.count();

    // Components by decreasing size, then by id.
    std::vector<std::size_t> rank(c);
    std::iota(rank.begin(), rank.end(), std::size_t{0});
    std::stable_sort(rank.begin(), rank.end(),
                     [&](std::size_t a, std::size_t b) { return comps.sizes[a] > comps.sizes[b]; });

    // Null-space basis vector for component `comp` in the symmetric frame.
    auto indicator = [&](std::size_t comp) {
        VectorXd z = VectorXd::Zero(static_cast<Eigen::Index>(n));
        for (std::size_t v = 0; v < n; ++v) {
            if (comps.id[v] == comp) {
                z(static_cast<Eigen::Index>(v)) = lap.sqrt_degree(static_cast<Eigen::Index>(v));
            }
        }
        return VectorXd(z.normalized());
    };

    const VectorXd y0 = constant_direction(lap);
    verify_null_vector(lap, y0);

    const std::size_t null_dims = std::min(c - 1, m);
    MatrixXd frame(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(null_dims + 1));
    frame.col(0) = y0;
    for (std::size_t j = 0; j < null_dims; ++j) {
        frame.col(static_cast<Eigen::Index>(j + 1)) = indicator(rank[j]);
    }
    Eigen::HouseholderQR<MatrixXd> qr(frame);
    const MatrixXd q = qr.householderQ() * MatrixXd::Identity(frame.rows(), frame.cols());
    MatrixXd y(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    y.leftCols(static_cast<Eigen::Index>(null_dims)) =
        q.rightCols(static_cast<Eigen::Index>(null_dims));
    std::vector<double> values(null_dims, 0.0);
    std::size_t iterations = 0;

    const std::size_t remaining = m - null_dims;
    if (remaining > 0) {
        MatrixXd deflate(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(c));
        for (std::size_t j = 0; j < c; ++j) {
            deflate.col(static_cast<Eigen::Index>(j)) = indicator(j);
        }
        if (remaining + c > n) {
            throw ParameterError("not enough nonzero eigenpairs for the requested dimension");
        }
        const Eigenpairs pairs = smallest_restricted(lap.lsym, deflate, remaining, options);
        y.rightCols(static_cast<Eigen::Index>(remaining)) = pairs.vectors;
        for (std::size_t j = 0; j < remaining; ++j) {
            values.push_back(std::max(0.0, pairs.values(static_cast<Eigen::Index>(j))));
        }
        iterations = pairs.iterations;
    }
    return finish(lap, y, values, iterations, c);
}

std::vector<double> laplacian_spectrum(const AffinityMatrix& affinity) {
    const NormalizedLaplacian lap = normalized_laplacian(affinity);
    MatrixXd dense = MatrixXd(lap.lsym);
    dense = 0.5 * (dense + dense.transpose());
    Eigen::SelfAdjointEigenSolver<MatrixXd> solver(dense, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("dense eigensolver failed");
    }
    const VectorXd ev = solver.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

} // namespace nbgraph
