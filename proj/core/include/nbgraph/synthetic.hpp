#pragma once

#include "nbgraph/vectorstore.hpp"

#include <cstdint>

namespace nbgraph {

struct BlobSpec {
    std::size_t blobs = 3;
    std::size_t points = 600;
    std::size_t dim = 16;
    /// Distance between blob centers in units of the per-coordinate sigma.
    double separation = 6.0;
    double sigma = 1.0;
    /// Fraction of points drawn uniformly from the padded bounding box of
    /// the blobs. Each outlier is labeled with its nearest blob center.
    double outlier_fraction = 0.0;
    /// Inliers come in tight groups of this size (near-duplicates): each group
    /// has a Gaussian anchor and members jittered by group_spread*sigma.
    /// 1 draws every inlier independently.
    std::size_t group_size = 1;
    double group_spread = 0.05;
    std::uint64_t seed = 1;
};

/// Isotropic Gaussian blobs with labels "blob0", "blob1", ... Centers sit
/// on scaled coordinate axes (pairwise distance exactly separation*sigma)
/// when blobs <= dim, otherwise at random directions of the same radius.
VectorDataset make_blobs(const BlobSpec& spec);

} // namespace nbgraph
