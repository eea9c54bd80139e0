#pragma once

#include "spca/dataset.hpp"

#include <cstdint>
#include <utility>

namespace spca {

/// Backbone of the noisy spiral: Archimedean r = a*t for t in [1.5*pi, 4*pi],
/// with a chosen so the arc length is 30.
struct SpiralBackbone {
    static constexpr double kArcLength = 30.0;

    double t0;
    double t1;
    double a;

    SpiralBackbone();
    /// Arc length measured from t0.
    double arc_length(double t) const;
    double t_at_arc_length(double s) const;
    Eigen::Vector2d point(double t) const;
    /// Unit normal pointing away from the spiral centre.
    Eigen::Vector2d normal(double t) const;
    /// Transverse standard deviation at arc position s (0.05 -> 0.5, linear).
    static double transverse_std(double s);
};

/// 2-d samples spread uniformly in arc length along the spiral. The first half
/// of the arc gets Laplacian transverse offsets, the second half uniform ones,
/// both with std growing along the arc. `latent`, if given, receives
/// (arc position, transverse offset) per sample.
Dataset gen_noisy_spiral(Eigen::Index n, std::uint64_t seed, Matrix* latent = nullptr);

/// 3-d swiss roll (t cos t, h, t sin t), t in [1.5pi, 4.5pi], h in [0, 21],
/// plus isotropic Gaussian noise. `latent` receives (t, h).
Dataset gen_swiss_roll(Eigen::Index n, double noise_sigma, std::uint64_t seed, Matrix* latent = nullptr);

struct TwoClusterLayout {
    Eigen::Vector2d center[2];
    /// Unit principal axes per cluster: column 0 is the along-backbone axis.
    Eigen::Matrix2d axes[2];
    /// Per-cluster std along (axis 0, axis 1).
    Eigen::Vector2d stds[2];
};

/// Geometry used by gen_two_cluster, exposed for tests. Angles in degrees.
TwoClusterLayout two_cluster_layout(double alpha1_deg, double alpha2_deg, double theta1_deg,
                                    std::pair<double, double> std_ratios);

/// Two Gaussian clusters on a backbone bent by theta1. Cluster i's principal
/// axis is rotated by alpha_i away from its backbone segment and its
/// transverse/along std ratio is std_ratios.i. Labels hold the cluster id.
Dataset gen_two_cluster(double alpha1_deg, double alpha2_deg, double theta1_deg,
                        std::pair<double, double> std_ratios, Eigen::Index n, std::uint64_t seed);

/// Noisy 1-d curve in 3-d: three quarters of a helix turn, radius 5, rising
/// by 8, isotropic noise with std 0.1 -> 0.4 along the curve.
Dataset gen_curve3d(Eigen::Index n, std::uint64_t seed);

/// Zero-mean Gaussian with the given per-axis std, rotated by `rotation` (d x d).
Dataset gen_gaussian(Eigen::Index n, const Vector& stds, const Matrix& rotation, std::uint64_t seed);

}  // namespace spca
