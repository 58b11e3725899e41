#include "nbgraph/synthetic.hpp"

#include "nbgraph/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace nbgraph {

VectorDataset make_blobs(const BlobSpec& spec) {
    if (spec.blobs < 1 || spec.points < spec.blobs || spec.dim < 1) {
        throw ParameterError("blob spec needs blobs >= 1, points >= blobs, dim >= 1");
    }
    if (!(spec.outlier_fraction >= 0.0 && spec.outlier_fraction < 1.0)) {
        throw ParameterError("outlier fraction must lie in [0, 1)");
    }
    if (spec.group_size < 1 || !(spec.group_spread >= 0.0)) {
        throw ParameterError("group size must be >= 1 and group spread >= 0");
    }
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    // Radius placing orthogonal centers separation*sigma apart.
    const double radius = spec.separation * spec.sigma / std::sqrt(2.0);
    std::vector<std::vector<double>> centers(spec.blobs, std::vector<double>(spec.dim, 0.0));
    for (std::size_t b = 0; b < spec.blobs; ++b) {
        if (spec.blobs <= spec.dim) {
            centers[b][b] = radius;
        } else {
            double norm = 0.0;
            for (double& c : centers[b]) {
                c = normal(rng);
                norm += c * c;
            }
            for (double& c : centers[b]) {
                c *= radius / std::sqrt(norm);
            }
        }
    }

    const auto outliers = static_cast<std::size_t>(
        std::floor(spec.outlier_fraction * static_cast<double>(spec.points)));
    const std::size_t inliers = spec.points - outliers;
    std::vector<float> values;
    values.reserve(spec.points * spec.dim);
    std::vector<int> ids;
    ids.reserve(spec.points);
    std::vector<double> lo(spec.dim, std::numeric_limits<double>::infinity());
    std::vector<double> hi(spec.dim, -std::numeric_limits<double>::infinity());
    std::vector<double> anchor(spec.dim);
    for (std::size_t i = 0; i < inliers; ++i) {
        const std::size_t group = i / spec.group_size;
        const std::size_t b = group % spec.blobs;
        const bool grouped = spec.group_size > 1;
        if (grouped && i % spec.group_size == 0) {
            for (std::size_t d = 0; d < spec.dim; ++d) {
                anchor[d] = centers[b][d] + spec.sigma * normal(rng);
            }
        }
        for (std::size_t d = 0; d < spec.dim; ++d) {
            const double v = grouped ? anchor[d] + spec.group_spread * spec.sigma * normal(rng)
                                     : centers[b][d] + spec.sigma * normal(rng);
            lo[d] = std::min(lo[d], v);
            hi[d] = std::max(hi[d], v);
            values.push_back(static_cast<float>(v));
        }
        ids.push_back(static_cast<int>(b));
    }
    for (std::size_t i = 0; i < outliers; ++i) {
        std::vector<double> p(spec.dim);
        for (std::size_t d = 0; d < spec.dim; ++d) {
            const double pad = 0.1 * (hi[d] - lo[d]);
            std::uniform_real_distribution<double> uni(lo[d] - pad, hi[d] + pad);
            p[d] = uni(rng);
            values.push_back(static_cast<float>(p[d]));
        }
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t b = 0; b < spec.blobs; ++b) {
            double sq = 0.0;
            for (std::size_t d = 0; d < spec.dim; ++d) {
                sq += (p[d] - centers[b][d]) * (p[d] - centers[b][d]);
            }
            if (sq < best_d) {
                best_d = sq;
                best = b;
            }
        }
        ids.push_back(static_cast<int>(best));
    }
    VectorDataset ds(spec.points, spec.dim, std::move(values), "blobs");
    std::vector<std::string> names;
    names.reserve(ids.size());
    for (int id : ids) {
        names.push_back("blob" + std::to_string(id));
    }
    ds.set_labels(make_labels(names));
    ds.validate();
    return ds;
}

} // namespace nbgraph
