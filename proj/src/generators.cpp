#include "spca/generators.hpp"

#include "spca/errors.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace spca {

namespace {

constexpr double kPi = std::numbers::pi;

double primitive_arc(double t) {
    return 0.5 * (t * std::sqrt(1.0 + t * t) + std::asinh(t));
}

double deg2rad(double deg) { return deg * kPi / 180.0; }

Eigen::Matrix2d rotation2(double rad) {
    Eigen::Matrix2d r;
    r << std::cos(rad), -std::sin(rad), std::sin(rad), std::cos(rad);
    return r;
}

}  // namespace

SpiralBackbone::SpiralBackbone() : t0(1.5 * kPi), t1(4.0 * kPi) {
    a = kArcLength / (primitive_arc(t1) - primitive_arc(t0));
}

double SpiralBackbone::arc_length(double t) const {
    return a * (primitive_arc(t) - primitive_arc(t0));
}

double SpiralBackbone::t_at_arc_length(double s) const {
    double lo = t0;
    double hi = t1;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * t1; ++it) {
        double mid = 0.5 * (lo + hi);
        if (arc_length(mid) < s) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

Eigen::Vector2d SpiralBackbone::point(double t) const {
    return {a * t * std::cos(t), a * t * std::sin(t)};
}

Eigen::Vector2d SpiralBackbone::normal(double t) const {
    Eigen::Vector2d tangent(std::cos(t) - t * std::sin(t), std::sin(t) + t * std::cos(t));
    return Eigen::Vector2d(tangent.y(), -tangent.x()).normalized();
}

double SpiralBackbone::transverse_std(double s) {
    return 0.05 + 0.45 * s / kArcLength;
}

Dataset gen_noisy_spiral(Eigen::Index n, std::uint64_t seed, Matrix* latent) {
    if (n < 1) throw InvalidArgument("gen_noisy_spiral: n must be >= 1");
    const SpiralBackbone spiral;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    PointMatrix pts(n, 2);
    if (latent) latent->resize(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        double s = SpiralBackbone::kArcLength * unit(rng);
        double sigma = SpiralBackbone::transverse_std(s);
        double offset;
        if (s < 0.5 * SpiralBackbone::kArcLength) {
            // Laplacian with std sigma: scale b = sigma / sqrt(2).
            double v;
            do {
                v = unit(rng) - 0.5;
            } while (v == -0.5);
            double b = sigma / std::numbers::sqrt2;
            offset = -b * std::copysign(1.0, v) * std::log1p(-2.0 * std::abs(v));
        } else {
            double half_width = std::sqrt(3.0) * sigma;
            offset = half_width * (2.0 * unit(rng) - 1.0);
        }
        double t = spiral.t_at_arc_length(s);
        pts.row(i) = (spiral.point(t) + offset * spiral.normal(t)).transpose();
        if (latent) {
            (*latent)(i, 0) = s;
            (*latent)(i, 1) = offset;
        }
    }
    return Dataset(std::move(pts));
}

Dataset gen_swiss_roll(Eigen::Index n, double noise_sigma, std::uint64_t seed, Matrix* latent) {
    if (n < 1) throw InvalidArgument("gen_swiss_roll: n must be >= 1");
    if (!(noise_sigma >= 0.0)) throw InvalidArgument("gen_swiss_roll: noise_sigma must be >= 0");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(1.5 * kPi, 4.5 * kPi);
    std::uniform_real_distribution<double> height(0.0, 21.0);
    std::normal_distribution<double> noise(0.0, 1.0);

    PointMatrix pts(n, 3);
    if (latent) latent->resize(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        double t = angle(rng);
        double h = height(rng);
        pts(i, 0) = t * std::cos(t);
        pts(i, 1) = h;
        pts(i, 2) = t * std::sin(t);
        if (noise_sigma > 0.0) {
            for (int j = 0; j < 3; ++j) pts(i, j) += noise_sigma * noise(rng);
        }
        if (latent) {
            (*latent)(i, 0) = t;
            (*latent)(i, 1) = h;
        }
    }
    return Dataset(std::move(pts));
}

TwoClusterLayout two_cluster_layout(double alpha1_deg, double alpha2_deg, double theta1_deg,
                                    std::pair<double, double> std_ratios) {
    if (!(std_ratios.first > 0.0) || !(std_ratios.second > 0.0)) {
        throw InvalidArgument("gen_two_cluster: std ratios must be positive");
    }
    constexpr double kSeparation = 4.0;
    const double theta = deg2rad(theta1_deg);
    TwoClusterLayout layout;
    layout.center[0] = Eigen::Vector2d::Zero();
    layout.center[1] = kSeparation * Eigen::Vector2d(std::cos(theta), std::sin(theta));
    layout.axes[0] = rotation2(deg2rad(alpha1_deg));
    layout.axes[1] = rotation2(theta + deg2rad(alpha2_deg));
    layout.stds[0] = Eigen::Vector2d(1.0, std_ratios.first);
    layout.stds[1] = Eigen::Vector2d(1.0, std_ratios.second);
    return layout;
}

Dataset gen_two_cluster(double alpha1_deg, double alpha2_deg, double theta1_deg,
                        std::pair<double, double> std_ratios, Eigen::Index n, std::uint64_t seed) {
    if (n < 2) throw InvalidArgument("gen_two_cluster: n must be >= 2");
    const TwoClusterLayout layout = two_cluster_layout(alpha1_deg, alpha2_deg, theta1_deg, std_ratios);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);

    const Eigen::Index first = (n + 1) / 2;
    PointMatrix pts(n, 2);
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        int c = i < first ? 0 : 1;
        Eigen::Vector2d z(layout.stds[c].x() * noise(rng), layout.stds[c].y() * noise(rng));
        pts.row(i) = (layout.center[c] + layout.axes[c] * z).transpose();
        labels[static_cast<std::size_t>(i)] = c;
    }
    return Dataset(std::move(pts), std::move(labels));
}

Dataset gen_curve3d(Eigen::Index n, std::uint64_t seed) {
    if (n < 1) throw InvalidArgument("gen_curve3d: n must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 1.0);

    PointMatrix pts(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
        double t = unit(rng);
        double phi = 1.5 * kPi * t;
        double sigma = 0.1 + 0.3 * t;
        pts(i, 0) = 5.0 * std::cos(phi) + sigma * noise(rng);
        pts(i, 1) = 5.0 * std::sin(phi) + sigma * noise(rng);
        pts(i, 2) = 8.0 * t + sigma * noise(rng);
    }
    return Dataset(std::move(pts));
}

Dataset gen_gaussian(Eigen::Index n, const Vector& stds, const Matrix& rotation, std::uint64_t seed) {
    if (n < 1) throw InvalidArgument("gen_gaussian: n must be >= 1");
    const Eigen::Index d = stds.size();
    if (rotation.rows() != d || rotation.cols() != d) {
        throw InvalidArgument("gen_gaussian: rotation must be d x d");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    PointMatrix pts(n, d);
    Vector z(d);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) z(j) = stds(j) * noise(rng);
        pts.row(i) = (rotation * z).transpose();
    }
    return Dataset(std::move(pts));
}

}  // namespace spca
