#include "spca/density_metric.hpp"

#include "spca/errors.hpp"

#include <algorithm>
#include <cmath>

namespace spca {

Eigen::Index MetricConfig::resolve_k(Eigen::Index n) const {
    if (density_k > 0) return density_k;
    return std::max<Eigen::Index>(10, static_cast<Eigen::Index>(std::ceil(0.05 * static_cast<double>(n))));
}

void MetricConfig::validate() const {
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw InvalidArgument("gamma must be a finite value >= 0");
    if (density_k < 0) throw InvalidArgument("density_k must be >= 1 (0 selects the default)");
}

namespace {

// Distance from c to its k-th nearest value in the sorted array.
double kth_distance(const std::vector<double>& sorted, double c, std::size_t k) {
    auto right = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), c) - sorted.begin());
    std::size_t left = right;  // candidates are [left - 1] and [right]
    double r = 0.0;
    for (std::size_t taken = 0; taken < k; ++taken) {
        double dl = left > 0 ? c - sorted[left - 1] : std::numeric_limits<double>::infinity();
        double dr = right < sorted.size() ? sorted[right] - c : std::numeric_limits<double>::infinity();
        if (dl <= dr) {
            r = dl;
            --left;
        } else {
            r = dr;
            ++right;
        }
    }
    return r;
}

std::vector<double> prefix_for(const PrincipalCurve& curve, double gamma) {
    const std::size_t m = curve.vertices.size();
    std::vector<double> prefix(m, 0.0);
    double g_prev = std::pow(curve.density[0], gamma);
    for (std::size_t j = 1; j < m; ++j) {
        double g = std::pow(curve.density[j], gamma);
        prefix[j] = prefix[j - 1] + 0.5 * (curve.cum_len[j] - curve.cum_len[j - 1]) * (g_prev + g);
        g_prev = g;
    }
    return prefix;
}

void require_density(const PrincipalCurve& curve) {
    if (!curve.has_density()) throw InvalidArgument("curve has no density attached");
}

double checked_coord(const PrincipalCurve& curve, double u, const char* what) {
    const double len = curve.length();
    const double slack = 1e-12 * std::max(len, 1.0);
    if (!(u >= -slack && u <= len + slack)) {
        throw OutOfRange(std::string(what) + " coordinate " + std::to_string(u) + " outside [0, " +
                             std::to_string(len) + "]",
                         0.0, len);
    }
    return std::clamp(u, 0.0, len);
}

// Integral of the interpolated weight from 0 to u.
double prefix_at(const PrincipalCurve& curve, const std::vector<double>& prefix, double gamma, double u) {
    const auto j = static_cast<std::size_t>(segment_of(curve, u));
    const double c0 = curve.cum_len[j];
    if (u == c0) return prefix[j];
    if (u == curve.cum_len[j + 1]) return prefix[j + 1];
    const double h = curve.cum_len[j + 1] - c0;
    const double g0 = std::pow(curve.density[j], gamma);
    const double g1 = std::pow(curve.density[j + 1], gamma);
    const double s = u - c0;
    const double gu = g0 + (g1 - g0) * (s / h);
    return prefix[j] + 0.5 * s * (g0 + gu);
}

const std::vector<double>& prefix_cache(const PrincipalCurve& curve, double gamma, std::vector<double>& scratch) {
    if (curve.metric_gamma == gamma && curve.metric_prefix.size() == curve.vertices.size()) {
        return curve.metric_prefix;
    }
    scratch = prefix_for(curve, gamma);
    return scratch;
}

}  // namespace

void attach_density(PrincipalCurve& curve, const Dataset& data, const MetricConfig& cfg) {
    if (data.size() < 1) throw InvalidArgument("attach_density: empty dataset");
    std::vector<double> coords(static_cast<std::size_t>(data.size()));
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        coords[static_cast<std::size_t>(i)] = project_orthogonal(curve, data.point(i)).u;
    }
    attach_density(curve, std::move(coords), cfg);
}

void attach_density(PrincipalCurve& curve, std::vector<double> coords, const MetricConfig& cfg) {
    cfg.validate();
    if (curve.vertices.size() < 2) throw InvalidArgument("attach_density: curve needs at least 2 vertices");
    const auto n = static_cast<Eigen::Index>(coords.size());
    const Eigen::Index k = cfg.resolve_k(n);
    if (n < k) {
        throw InvalidArgument("attach_density: " + std::to_string(n) + " projected samples, density_k = " +
                              std::to_string(k));
    }
    std::sort(coords.begin(), coords.end());

    const std::size_t m = curve.vertices.size();
    curve.density.assign(m, 0.0);
    double max_finite = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        double r = kth_distance(coords, curve.cum_len[j], static_cast<std::size_t>(k));
        if (r > 0.0) {
            curve.density[j] = static_cast<double>(k) / (2.0 * static_cast<double>(n) * r);
            max_finite = std::max(max_finite, curve.density[j]);
        }
    }
    if (max_finite == 0.0) max_finite = 1.0 / std::max(curve.length(), 1e-300);
    for (double& p : curve.density) {
        if (p == 0.0) p = max_finite;
    }
    curve.metric_gamma = cfg.gamma;
    curve.metric_prefix = prefix_for(curve, cfg.gamma);
}

double metric_length(const PrincipalCurve& curve, double u_from, double u_to, const MetricConfig& cfg) {
    require_density(curve);
    u_from = checked_coord(curve, u_from, "start");
    u_to = checked_coord(curve, u_to, "end");
    if (cfg.gamma == 0.0) return u_to - u_from;
    std::vector<double> scratch;
    const auto& prefix = prefix_cache(curve, cfg.gamma, scratch);
    return prefix_at(curve, prefix, cfg.gamma, u_to) - prefix_at(curve, prefix, cfg.gamma, u_from);
}

double inverse_metric_length(const PrincipalCurve& curve, double u_from, double r, const MetricConfig& cfg) {
    require_density(curve);
    u_from = checked_coord(curve, u_from, "start");
    if (r == 0.0) return u_from;
    const double len = curve.length();
    if (cfg.gamma == 0.0) {
        double u = u_from + r;
        const double slack = 1e-12 * std::max(len, 1e-300);
        if (!(u >= -slack && u <= len + slack)) {
            throw OutOfRange("metric length outside the curve", -u_from, len - u_from);
        }
        return std::clamp(u, 0.0, len);
    }
    std::vector<double> scratch;
    const auto& prefix = prefix_cache(curve, cfg.gamma, scratch);
    const double start = prefix_at(curve, prefix, cfg.gamma, u_from);
    const double total = prefix.back();
    const double slack = 1e-12 * std::max(total, 1e-300);
    double target = start + r;
    if (!(target >= -slack && target <= total + slack)) {
        throw OutOfRange("metric length " + std::to_string(r) + " outside the attainable range", -start,
                         total - start);
    }
    target = std::clamp(target, 0.0, total);
    auto it = std::upper_bound(prefix.begin(), prefix.end(), target);
    auto j = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(it - prefix.begin() - 1, 0,
                                                                  static_cast<std::ptrdiff_t>(prefix.size()) - 2));
    double lo = curve.cum_len[j];
    double hi = curve.cum_len[j + 1];
    if (prefix[j] == target) return lo;
    if (prefix[j + 1] == target) return hi;
    const double tol = 1e-10 * std::max(len, 1e-300);
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (prefix_at(curve, prefix, cfg.gamma, mid) < target) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

double metric_weight(const PrincipalCurve& curve, double u, double gamma) {
    require_density(curve);
    u = std::clamp(u, 0.0, curve.length());
    const auto j = static_cast<std::size_t>(segment_of(curve, u));
    const double h = curve.cum_len[j + 1] - curve.cum_len[j];
    const double s = (u - curve.cum_len[j]) / h;
    const double g0 = std::pow(curve.density[j], gamma);
    const double g1 = std::pow(curve.density[j + 1], gamma);
    return g0 + (g1 - g0) * s;
}

double total_metric_length(const PrincipalCurve& curve, const MetricConfig& cfg) {
    return metric_length(curve, 0.0, curve.length(), cfg);
}

}  // namespace spca
