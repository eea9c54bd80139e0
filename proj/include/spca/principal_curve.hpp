#pragma once

#include "spca/dataset.hpp"
#include "spca/kdtree.hpp"
#include "spca/local_geometry.hpp"

#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace spca {

/// Rigidity parameters of the curve tracer. Zero (or negative cross_tol)
/// selects the data-dependent default; see resolve_params.
struct PcParams {
    double k_frac = 0.1;
    /// Step length. 0: 0.05 * data_scale.
    double tau = 0.0;
    /// Stiffness; +infinity disables the pull toward the local mean ahead.
    double q = 10.0;
    /// 0: three times the median nearest-neighbour distance.
    double d_out = 0.0;
    /// < 0: tau / 2.
    double cross_tol = -1.0;
    /// Per growth direction, origin included. 0: 10 * sqrt(N).
    Eigen::Index max_vertices = 0;

    /// ceil(k_frac * n), the neighbourhood size used for n samples.
    Eigen::Index neighbors(Eigen::Index n) const;
    /// Throws InvalidArgument unless every field is usable for n samples.
    void validate(Eigen::Index n) const;
};

/// sqrt(trace(covariance) / d).
double data_scale(const Dataset& data);

/// Median distance from each sample to its nearest other sample.
double median_nn_distance(const Dataset& data, const PointIndex& index);

/// Copy of p with every automatic field replaced by its concrete value.
PcParams resolve_params(const PcParams& p, const Dataset& data, const PointIndex& index);

enum class StopReason { None, Crossing, OutOfManifold, MaxVertices };

const char* to_string(StopReason r);

struct PrincipalCurve {
    std::vector<Vector> vertices;
    /// Aligned local PCA at each vertex.
    std::vector<LocalBasis> bases;
    /// Basis column the curve follows.
    Eigen::Index axis_index = 0;
    /// Euclidean arc length from vertex 0.
    std::vector<double> cum_len;
    /// Vertex the curve was launched from.
    Eigen::Index launch_index = 0;
    StopReason stop_forward = StopReason::None;
    StopReason stop_backward = StopReason::None;

    /// Per-vertex density estimate (empty until attach_density).
    std::vector<double> density;
    /// Integral of density^gamma from vertex 0, per vertex.
    std::vector<double> metric_prefix;
    double metric_gamma = std::numeric_limits<double>::quiet_NaN();

    Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(vertices.size()); }
    double length() const noexcept { return cum_len.empty() ? 0.0 : cum_len.back(); }
    double launch_coord() const { return cum_len[static_cast<std::size_t>(launch_index)]; }
    bool has_density() const noexcept { return !density.empty(); }
};

/// Data plus its search index and resolved parameters, shared by every curve
/// drawn on the same sample set.
class CurveContext {
public:
    CurveContext(std::shared_ptr<const Dataset> data, const PcParams& params);

    const Dataset& data() const noexcept { return *data_; }
    const std::shared_ptr<const Dataset>& data_ptr() const noexcept { return data_; }
    const PointIndex& index() const noexcept { return index_; }
    /// Fully resolved parameters.
    const PcParams& params() const noexcept { return params_; }
    Eigen::Index k() const noexcept { return k_; }

    double nearest_distance(const Vector& x) const;
    Neighborhood neighborhood(const Vector& x) const { return knn(index_, x, k_); }
    LocalBasis basis_at(const Vector& x) const { return local_pca(*data_, neighborhood(x)); }

private:
    std::shared_ptr<const Dataset> data_;
    PointIndex index_;
    PcParams params_;
    Eigen::Index k_;
};

/// Options that vary per drawn curve on a shared context.
struct DrawOptions {
    /// Overrides params().tau when > 0; cross_tol is scaled by the same ratio.
    double tau = 0.0;
    bool bidirectional = true;
    /// Reject origins farther than d_out from every sample.
    bool require_origin_inside = true;
};

/// Traces one principal curve from `origin` along column `axis_index` of the
/// local basis aligned to `ref_basis`. Stops per direction on crossing a prior
/// curve, leaving the data (d_out), or reaching max_vertices; the vertex that
/// triggered the stop is kept.
PrincipalCurve draw_pc(const CurveContext& ctx, const Vector& origin, const Matrix& ref_basis,
                       Eigen::Index axis_index, const std::vector<const PrincipalCurve*>& prior_curves,
                       const DrawOptions& opts = {});

/// Convenience overload building a context from scratch.
PrincipalCurve draw_pc(const Dataset& data, const Vector& origin, const Matrix& ref_basis,
                       Eigen::Index axis_index, const PcParams& params,
                       const std::vector<const PrincipalCurve*>& prior_curves = {},
                       bool bidirectional = true);

struct Projection {
    /// Arc-length coordinate of the closest polyline point.
    double u = 0.0;
    Vector residual;
    Eigen::Index segment = 0;
    /// Position inside the segment, in [0, 1].
    double t = 0.0;
};

Projection project_orthogonal(const PrincipalCurve& curve, const Vector& x);

/// Polyline point at arc coordinate u (clamped to the curve).
Vector point_at(const PrincipalCurve& curve, double u);

/// Vertex whose cum_len is closest to u.
Eigen::Index nearest_vertex(const PrincipalCurve& curve, double u);

/// Segment containing u: the largest j with cum_len[j] <= u, capped at size-2.
Eigen::Index segment_of(const PrincipalCurve& curve, double u);

/// Euclidean distance from x to the polyline.
double distance_to_curve(const PrincipalCurve& curve, const Vector& x);

/// Mean squared residual norm over all samples.
double projection_error(const PrincipalCurve& curve, const Dataset& data);

struct GridCell {
    PcParams params;
    /// NaN when the cell failed.
    double error = std::numeric_limits<double>::quiet_NaN();
    std::string failure;
};

struct PcFitResult {
    PcParams best;
    std::size_t best_index = 0;
    std::vector<GridCell> surface;
};

/// Draws one first curve per cell (origin fixed, local PCA axis 0 at the
/// origin) and returns the cell with the lowest projection error; ties go to
/// the earlier cell.
PcFitResult fit_pc_params(const Dataset& data, const std::vector<PcParams>& grid, const Vector& origin);

/// Training mean, or the nearest sample when the mean is farther than the
/// default d_out from the data.
Vector param_fit_origin(const Dataset& data);

/// k_frac x tau x q grid: {0.01, 0.1, 0.3} x {0.02, 1, 3} * data_scale x {2, 10, inf}.
std::vector<PcParams> default_pc_grid(const Dataset& data);

/// CSV with header "k_frac,tau,q,error", one row per cell.
std::string format_error_surface(const std::vector<GridCell>& surface);

}  // namespace spca
