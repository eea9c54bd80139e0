#pragma once

#include "spca/dataset.hpp"

#include <span>
#include <utility>
#include <vector>

namespace spca {

/// (squared distance, sample index) pair as returned by neighbour queries.
struct Neighbor {
    double dist2;
    Eigen::Index index;

    friend bool operator<(const Neighbor& a, const Neighbor& b) {
        return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index);
    }
};

/// Exact k-d tree over the rows of a point matrix. Results are identical to an
/// exhaustive scan, including the tie rule (smaller index first).
class PointIndex {
public:
    explicit PointIndex(const PointMatrix& points, int leaf_size = 12);

    Eigen::Index size() const noexcept { return n_; }
    Eigen::Index dim() const noexcept { return d_; }

    /// k nearest samples sorted by (distance, index).
    std::vector<Neighbor> knn(std::span<const double> query, Eigen::Index k) const;

    /// All samples with squared distance <= radius^2, unsorted.
    std::vector<Eigen::Index> within(std::span<const double> query, double radius) const;

private:
    struct Node {
        int begin;
        int end;
        int split_dim;  // -1 for leaves
        double split;
        int left;
        int right;
    };

    int build(int begin, int end, int depth);
    double dist2(const double* a, const double* b) const;

    Eigen::Index n_;
    Eigen::Index d_;
    int leaf_size_;
    std::vector<double> coords_;  // permuted copy, row-major
    std::vector<Eigen::Index> order_;
    std::vector<Node> nodes_;
};

/// Squared Euclidean distance, summed in coordinate order. Every distance in
/// the library goes through this so tie-breaking stays consistent.
inline double squared_distance(const double* a, const double* b, Eigen::Index d) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
        double t = a[j] - b[j];
        s += t * t;
    }
    return s;
}

}  // namespace spca
