#pragma once

#include "spca/principal_curve.hpp"

#include <vector>

namespace spca {

struct MetricConfig {
    double gamma = 1.0;
    /// Neighbour rank of the 1-d density estimate. 0: max(10, ceil(0.05 * n)).
    Eigen::Index density_k = 0;

    Eigen::Index resolve_k(Eigen::Index n) const;
    void validate() const;
};

/// Projects every sample onto the curve and stores the 1-d k-NN density
/// p(u) = k / (2 n r_k(u)) at each vertex, plus the metric prefix for cfg.gamma.
void attach_density(PrincipalCurve& curve, const Dataset& data, const MetricConfig& cfg);

/// Same, from already projected arc coordinates.
void attach_density(PrincipalCurve& curve, std::vector<double> coords, const MetricConfig& cfg);

/// Signed integral of p^gamma from u_from to u_to. The integrand is linear in
/// each segment between vertex values of p^gamma.
double metric_length(const PrincipalCurve& curve, double u_from, double u_to, const MetricConfig& cfg);

/// The u with metric_length(curve, u_from, u) == r.
double inverse_metric_length(const PrincipalCurve& curve, double u_from, double r, const MetricConfig& cfg);

/// Interpolated p(u)^gamma, the local metric weight.
double metric_weight(const PrincipalCurve& curve, double u, double gamma);

/// Metric length of the whole curve.
double total_metric_length(const PrincipalCurve& curve, const MetricConfig& cfg);

}  // namespace spca
