#pragma once

#include "spca/dataset.hpp"
#include "spca/kdtree.hpp"

#include <vector>

namespace spca {

struct Neighborhood {
    /// Sorted by (distance to center, index).
    std::vector<Eigen::Index> indices;
    Vector center;
};

struct LocalBasis {
    /// d x d, orthonormal columns.
    Matrix vectors;
    /// Variance along each column. Sorted descending as returned by local_pca;
    /// after align_basis they follow their columns.
    Vector eigenvalues;
    bool degenerate = false;
};

/// Exhaustive k nearest neighbours; ties go to the smaller sample index.
Neighborhood knn(const Dataset& data, const Vector& query, Eigen::Index k);

/// Same result through a prebuilt index over data.points.
Neighborhood knn(const PointIndex& index, const Vector& query, Eigen::Index k);

/// Eigendecomposition of the neighbourhood covariance (centred on the
/// neighbourhood mean). Each eigenvector's largest-magnitude coordinate is made
/// positive. Zero covariance yields the canonical axes flagged degenerate.
LocalBasis local_pca(const Dataset& data, const Neighborhood& nbhd);

/// Greedy assignment of candidate columns to reference columns, largest |dot|
/// first, with signs flipped so every dot with the reference is >= 0.
LocalBasis align_basis(const LocalBasis& candidate, const Matrix& reference);

/// Mean displacement from nbhd.center over the neighbours lying strictly
/// ahead of the center along `direction`; zero when none do.
Vector local_mean_ahead(const Dataset& data, const Neighborhood& nbhd, const Vector& direction);

}  // namespace spca
