#include "spca/local_geometry.hpp"

#include "spca/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <numeric>

namespace spca {

Neighborhood knn(const Dataset& data, const Vector& query, Eigen::Index k) {
    const Eigen::Index n = data.size();
    if (query.size() != data.dim()) throw InvalidArgument("knn: query dimension mismatch");
    if (k < 1 || k > n) throw InvalidArgument("knn: k must be in [1, N], got " + std::to_string(k));

    std::vector<Neighbor> all(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        all[static_cast<std::size_t>(i)] = {squared_distance(query.data(), &data.points(i, 0), data.dim()), i};
    }
    std::partial_sort(all.begin(), all.begin() + k, all.end());

    Neighborhood out;
    out.center = query;
    out.indices.reserve(static_cast<std::size_t>(k));
    for (Eigen::Index i = 0; i < k; ++i) out.indices.push_back(all[static_cast<std::size_t>(i)].index);
    return out;
}

Neighborhood knn(const PointIndex& index, const Vector& query, Eigen::Index k) {
    if (k < 1 || k > index.size()) throw InvalidArgument("knn: k must be in [1, N], got " + std::to_string(k));
    auto found = index.knn({query.data(), static_cast<std::size_t>(query.size())}, k);
    Neighborhood out;
    out.center = query;
    out.indices.reserve(found.size());
    for (const auto& nb : found) out.indices.push_back(nb.index);
    return out;
}

LocalBasis local_pca(const Dataset& data, const Neighborhood& nbhd) {
    const Eigen::Index m = static_cast<Eigen::Index>(nbhd.indices.size());
    const Eigen::Index d = data.dim();
    if (m < 2) throw InvalidArgument("local_pca: neighbourhood needs at least 2 points");

    Vector mean = Vector::Zero(d);
    for (auto i : nbhd.indices) mean += data.points.row(i).transpose();
    mean /= static_cast<double>(m);

    Matrix cov = Matrix::Zero(d, d);
    double scale = 0.0;
    for (auto i : nbhd.indices) {
        Vector c = data.points.row(i).transpose() - mean;
        cov.selfadjointView<Eigen::Lower>().rankUpdate(c);
        scale += data.points.row(i).squaredNorm();
    }
    cov = cov.selfadjointView<Eigen::Lower>();
    cov /= static_cast<double>(m - 1);
    scale /= static_cast<double>(m);

    LocalBasis out;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
    // Eigen returns ascending order.
    const Vector& ev = eig.eigenvalues();
    if (eig.info() != Eigen::Success || !(ev(d - 1) > 1e-20 * (1.0 + scale))) {
        out.vectors = Matrix::Identity(d, d);
        out.eigenvalues = Vector::Zero(d);
        out.degenerate = true;
        return out;
    }
    out.vectors = eig.eigenvectors().rowwise().reverse();
    out.eigenvalues = ev.reverse().cwiseMax(0.0);
    for (Eigen::Index j = 0; j < d; ++j) {
        Eigen::Index arg = 0;
        out.vectors.col(j).cwiseAbs().maxCoeff(&arg);
        if (out.vectors(arg, j) < 0.0) out.vectors.col(j) *= -1.0;
    }
    return out;
}

LocalBasis align_basis(const LocalBasis& candidate, const Matrix& reference) {
    const Eigen::Index d = candidate.vectors.cols();
    if (reference.rows() != candidate.vectors.rows() || reference.cols() != d) {
        throw InvalidArgument("align_basis: shape mismatch");
    }
    const Matrix dots = reference.transpose() * candidate.vectors;  // (ref j, cand c)
    const Matrix mag = dots.cwiseAbs();

    std::vector<bool> ref_used(static_cast<std::size_t>(d), false);
    std::vector<bool> cand_used(static_cast<std::size_t>(d), false);
    LocalBasis out;
    out.vectors.resize(candidate.vectors.rows(), d);
    out.eigenvalues.resize(d);
    out.degenerate = candidate.degenerate;

    for (Eigen::Index step = 0; step < d; ++step) {
        Eigen::Index best_r = -1;
        Eigen::Index best_c = -1;
        double best = -1.0;
        for (Eigen::Index r = 0; r < d; ++r) {
            if (ref_used[static_cast<std::size_t>(r)]) continue;
            for (Eigen::Index c = 0; c < d; ++c) {
                if (cand_used[static_cast<std::size_t>(c)]) continue;
                if (mag(r, c) > best) {
                    best = mag(r, c);
                    best_r = r;
                    best_c = c;
                }
            }
        }
        ref_used[static_cast<std::size_t>(best_r)] = true;
        cand_used[static_cast<std::size_t>(best_c)] = true;
        double sign = dots(best_r, best_c) < 0.0 ? -1.0 : 1.0;
        out.vectors.col(best_r) = sign * candidate.vectors.col(best_c);
        out.eigenvalues(best_r) = candidate.eigenvalues(best_c);
    }
    return out;
}

Vector local_mean_ahead(const Dataset& data, const Neighborhood& nbhd, const Vector& direction) {
    Vector sum = Vector::Zero(data.dim());
    Eigen::Index count = 0;
    for (auto i : nbhd.indices) {
        Vector disp = data.points.row(i).transpose() - nbhd.center;
        if (disp.dot(direction) > 0.0) {
            sum += disp;
            ++count;
        }
    }
    if (count == 0) return sum;
    return sum / static_cast<double>(count);
}

}  // namespace spca
