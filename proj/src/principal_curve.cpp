#include "spca/principal_curve.hpp"

#include "spca/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace spca {

Eigen::Index PcParams::neighbors(Eigen::Index n) const {
    return static_cast<Eigen::Index>(std::ceil(k_frac * static_cast<double>(n) - 1e-9));
}

void PcParams::validate(Eigen::Index n) const {
    if (!(k_frac > 0.0 && k_frac <= 1.0)) throw InvalidArgument("k_frac must be in (0, 1]");
    if (neighbors(n) < 2) {
        throw InvalidArgument("k_frac * N must give at least 2 neighbours (N = " + std::to_string(n) + ")");
    }
    if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidArgument("tau must be positive");
    if (!(q > 0.0)) throw InvalidArgument("q must be positive");
    if (!(d_out > 0.0) || !std::isfinite(d_out)) throw InvalidArgument("d_out must be positive");
    if (!(cross_tol >= 0.0) || !std::isfinite(cross_tol)) throw InvalidArgument("cross_tol must be >= 0");
    if (max_vertices < 2) throw InvalidArgument("max_vertices must be >= 2");
}

double data_scale(const Dataset& data) {
    const Eigen::Index n = data.size();
    if (n < 2) return 0.0;
    PointMatrix centered = data.points.rowwise() - data.points.colwise().mean();
    double trace = centered.squaredNorm() / static_cast<double>(n - 1);
    return std::sqrt(trace / static_cast<double>(data.dim()));
}

double median_nn_distance(const Dataset& data, const PointIndex& index) {
    const Eigen::Index n = data.size();
    if (n < 2) return 0.0;
    std::vector<double> nn(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        auto found = index.knn({&data.points(i, 0), static_cast<std::size_t>(data.dim())}, 2);
        // The sample itself is one of the two (or a duplicate at distance 0).
        nn[static_cast<std::size_t>(i)] = std::sqrt(found[1].dist2);
    }
    auto mid = nn.begin() + static_cast<std::ptrdiff_t>(nn.size() / 2);
    std::nth_element(nn.begin(), mid, nn.end());
    return *mid;
}

PcParams resolve_params(const PcParams& p, const Dataset& data, const PointIndex& index) {
    PcParams out = p;
    const double scale = data_scale(data);
    if (out.tau == 0.0) out.tau = 0.05 * scale;
    if (out.d_out == 0.0) {
        out.d_out = 3.0 * median_nn_distance(data, index);
        if (out.d_out <= 0.0) out.d_out = 1e-3 * scale;
    }
    if (out.cross_tol < 0.0) out.cross_tol = 0.5 * out.tau;
    if (out.max_vertices == 0) {
        out.max_vertices = std::max<Eigen::Index>(
            2, static_cast<Eigen::Index>(std::ceil(10.0 * std::sqrt(static_cast<double>(data.size())))));
    }
    return out;
}

const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::None: return "none";
        case StopReason::Crossing: return "crossing";
        case StopReason::OutOfManifold: return "out_of_manifold";
        case StopReason::MaxVertices: return "max_vertices";
    }
    return "unknown";
}

CurveContext::CurveContext(std::shared_ptr<const Dataset> data, const PcParams& params)
    : data_(std::move(data)), index_(data_->points) {
    data_->validate();
    params_ = resolve_params(params, *data_, index_);
    params_.validate(data_->size());
    k_ = params_.neighbors(data_->size());
}

double CurveContext::nearest_distance(const Vector& x) const {
    auto found = index_.knn({x.data(), static_cast<std::size_t>(x.size())}, 1);
    return std::sqrt(found[0].dist2);
}

namespace {

struct Half {
    std::vector<Vector> vertices;
    std::vector<LocalBasis> bases;
    StopReason stop = StopReason::None;
};

// Grows one direction from the origin; the origin itself is not included.
Half grow(const CurveContext& ctx, const Vector& origin, const Neighborhood& origin_nbhd,
          const LocalBasis& origin_basis, Eigen::Index axis, double sign, double tau, double cross_tol,
          const std::vector<const PrincipalCurve*>& prior) {
    const PcParams& p = ctx.params();
    const bool stiff = std::isinf(p.q);
    Half half;
    std::vector<bool> armed(prior.size(), false);
    for (std::size_t c = 0; c < prior.size(); ++c) {
        armed[c] = distance_to_curve(*prior[c], origin) > cross_tol;
    }

    Vector x = origin;
    Neighborhood nbhd = origin_nbhd;
    LocalBasis basis = origin_basis;
    Eigen::Index count = 1;
    while (true) {
        if (count >= p.max_vertices) {
            half.stop = StopReason::MaxVertices;
            break;
        }
        Vector v = sign * basis.vectors.col(axis);
        if (!stiff) {
            Vector mu = local_mean_ahead(ctx.data(), nbhd, v);
            v += mu / p.q;
        }
        double norm = v.norm();
        if (!(norm > 0.0)) v = sign * basis.vectors.col(axis), norm = 1.0;
        Vector next = x + (tau / norm) * v;
        ++count;

        Neighborhood next_nbhd = ctx.neighborhood(next);
        LocalBasis fresh = local_pca(ctx.data(), next_nbhd);
        LocalBasis aligned;
        if (fresh.degenerate) {
            aligned = basis;
            aligned.eigenvalues.setZero();
            aligned.degenerate = true;
        } else {
            aligned = align_basis(fresh, basis.vectors);
        }
        half.vertices.push_back(next);
        half.bases.push_back(aligned);

        bool crossed = false;
        for (std::size_t c = 0; c < prior.size(); ++c) {
            double dist = distance_to_curve(*prior[c], next);
            if (armed[c] && dist < cross_tol) crossed = true;
            if (dist > cross_tol) armed[c] = true;
        }
        if (crossed) {
            half.stop = StopReason::Crossing;
            break;
        }
        if (ctx.nearest_distance(next) > p.d_out) {
            half.stop = StopReason::OutOfManifold;
            break;
        }
        x = next;
        nbhd = std::move(next_nbhd);
        basis = std::move(aligned);
    }
    return half;
}

}  // namespace

PrincipalCurve draw_pc(const CurveContext& ctx, const Vector& origin, const Matrix& ref_basis,
                       Eigen::Index axis_index, const std::vector<const PrincipalCurve*>& prior_curves,
                       const DrawOptions& opts) {
    const Eigen::Index d = ctx.data().dim();
    if (origin.size() != d) throw InvalidArgument("draw_pc: origin dimension mismatch");
    if (axis_index < 0 || axis_index >= d) throw InvalidArgument("draw_pc: axis_index out of range");
    if (ref_basis.rows() != d || ref_basis.cols() != d) throw InvalidArgument("draw_pc: reference basis must be d x d");
    const PcParams& p = ctx.params();
    if (opts.require_origin_inside && ctx.nearest_distance(origin) > p.d_out) {
        throw InvalidArgument("draw_pc: origin is farther than d_out from every sample");
    }
    const double tau = opts.tau > 0.0 ? opts.tau : p.tau;
    const double cross_tol = p.cross_tol * tau / p.tau;

    const Neighborhood origin_nbhd = ctx.neighborhood(origin);
    LocalBasis start = local_pca(ctx.data(), origin_nbhd);
    if (start.degenerate) throw DegenerateGeometry("draw_pc: local PCA at the origin is degenerate");
    start = align_basis(start, ref_basis);

    Half fwd = grow(ctx, origin, origin_nbhd, start, axis_index, 1.0, tau, cross_tol, prior_curves);
    Half bwd;
    if (opts.bidirectional) bwd = grow(ctx, origin, origin_nbhd, start, axis_index, -1.0, tau, cross_tol, prior_curves);

    PrincipalCurve curve;
    curve.axis_index = axis_index;
    curve.stop_forward = fwd.stop;
    curve.stop_backward = bwd.stop;
    const std::size_t total = bwd.vertices.size() + 1 + fwd.vertices.size();
    curve.vertices.reserve(total);
    curve.bases.reserve(total);
    for (std::size_t i = bwd.vertices.size(); i-- > 0;) {
        curve.vertices.push_back(std::move(bwd.vertices[i]));
        curve.bases.push_back(std::move(bwd.bases[i]));
    }
    curve.launch_index = static_cast<Eigen::Index>(curve.vertices.size());
    curve.vertices.push_back(origin);
    curve.bases.push_back(start);
    for (std::size_t i = 0; i < fwd.vertices.size(); ++i) {
        curve.vertices.push_back(std::move(fwd.vertices[i]));
        curve.bases.push_back(std::move(fwd.bases[i]));
    }

    curve.cum_len.resize(curve.vertices.size());
    curve.cum_len[0] = 0.0;
    for (std::size_t i = 1; i < curve.vertices.size(); ++i) {
        curve.cum_len[i] = curve.cum_len[i - 1] + (curve.vertices[i] - curve.vertices[i - 1]).norm();
    }
    return curve;
}

PrincipalCurve draw_pc(const Dataset& data, const Vector& origin, const Matrix& ref_basis, Eigen::Index axis_index,
                       const PcParams& params, const std::vector<const PrincipalCurve*>& prior_curves,
                       bool bidirectional) {
    CurveContext ctx(std::make_shared<const Dataset>(data), params);
    DrawOptions opts;
    opts.bidirectional = bidirectional;
    return draw_pc(ctx, origin, ref_basis, axis_index, prior_curves, opts);
}

namespace {

struct SegmentHit {
    double dist2;
    Eigen::Index segment;
    double t;
};

SegmentHit closest_segment(const PrincipalCurve& curve, const Vector& x) {
    const std::size_t m = curve.vertices.size();
    if (m < 2) throw InvalidArgument("curve needs at least 2 vertices");
    const Eigen::Index d = x.size();
    SegmentHit best{std::numeric_limits<double>::infinity(), 0, 0.0};
    for (std::size_t j = 0; j + 1 < m; ++j) {
        const double* a = curve.vertices[j].data();
        const double* b = curve.vertices[j + 1].data();
        double ab2 = 0.0;
        double proj = 0.0;
        for (Eigen::Index c = 0; c < d; ++c) {
            double e = b[c] - a[c];
            ab2 += e * e;
            proj += (x[c] - a[c]) * e;
        }
        double t = ab2 > 0.0 ? std::clamp(proj / ab2, 0.0, 1.0) : 0.0;
        double dist2 = 0.0;
        for (Eigen::Index c = 0; c < d; ++c) {
            double pc = t == 1.0 ? b[c] : a[c] + t * (b[c] - a[c]);
            double r = x[c] - pc;
            dist2 += r * r;
        }
        if (dist2 < best.dist2) best = {dist2, static_cast<Eigen::Index>(j), t};
    }
    return best;
}

}  // namespace

Projection project_orthogonal(const PrincipalCurve& curve, const Vector& x) {
    SegmentHit hit = closest_segment(curve, x);
    const auto j = static_cast<std::size_t>(hit.segment);
    Projection out;
    out.segment = hit.segment;
    out.t = hit.t;
    if (hit.t == 0.0) {
        out.u = curve.cum_len[j];
    } else if (hit.t == 1.0) {
        out.u = curve.cum_len[j + 1];
    } else {
        out.u = curve.cum_len[j] + hit.t * (curve.cum_len[j + 1] - curve.cum_len[j]);
    }
    out.residual = x - point_at(curve, out.u);
    return out;
}

Eigen::Index segment_of(const PrincipalCurve& curve, double u) {
    const auto& c = curve.cum_len;
    auto it = std::upper_bound(c.begin(), c.end(), u);
    auto j = static_cast<Eigen::Index>(it - c.begin()) - 1;
    return std::clamp<Eigen::Index>(j, 0, static_cast<Eigen::Index>(c.size()) - 2);
}

Vector point_at(const PrincipalCurve& curve, double u) {
    if (curve.vertices.size() < 2) throw InvalidArgument("curve needs at least 2 vertices");
    u = std::clamp(u, 0.0, curve.length());
    const auto j = static_cast<std::size_t>(segment_of(curve, u));
    const double c0 = curve.cum_len[j];
    const double c1 = curve.cum_len[j + 1];
    if (u == c0) return curve.vertices[j];
    if (u == c1) return curve.vertices[j + 1];
    double t = (u - c0) / (c1 - c0);
    return curve.vertices[j] + t * (curve.vertices[j + 1] - curve.vertices[j]);
}

Eigen::Index nearest_vertex(const PrincipalCurve& curve, double u) {
    const auto j = segment_of(curve, u);
    const auto js = static_cast<std::size_t>(j);
    return (u - curve.cum_len[js] <= curve.cum_len[js + 1] - u) ? j : j + 1;
}

double distance_to_curve(const PrincipalCurve& curve, const Vector& x) {
    return std::sqrt(closest_segment(curve, x).dist2);
}

double projection_error(const PrincipalCurve& curve, const Dataset& data) {
    if (data.size() < 1) throw InvalidArgument("projection_error: empty dataset");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        sum += closest_segment(curve, data.point(i)).dist2;
    }
    return sum / static_cast<double>(data.size());
}

PcFitResult fit_pc_params(const Dataset& data, const std::vector<PcParams>& grid, const Vector& origin) {
    if (grid.empty()) throw InvalidArgument("fit_pc_params: empty grid");
    auto shared = std::make_shared<const Dataset>(data);
    PcFitResult result;
    bool any = false;
    std::string failures;
    for (std::size_t c = 0; c < grid.size(); ++c) {
        GridCell cell;
        cell.params = grid[c];
        try {
            CurveContext ctx(shared, grid[c]);
            cell.params = ctx.params();
            LocalBasis basis = ctx.basis_at(origin);
            if (basis.degenerate) throw DegenerateGeometry("degenerate local PCA at the origin");
            PrincipalCurve curve = draw_pc(ctx, origin, basis.vectors, 0, {});
            cell.error = projection_error(curve, data);
            if (!any || cell.error < result.surface[result.best_index].error) {
                result.best_index = c;
                any = true;
            }
        } catch (const Error& e) {
            cell.failure = e.what();
            failures += "\n  cell " + std::to_string(c) + ": " + e.what();
        }
        result.surface.push_back(std::move(cell));
    }
    if (!any) throw FitFailure("fit_pc_params: every grid cell failed:" + failures);
    result.best = result.surface[result.best_index].params;
    return result;
}

Vector param_fit_origin(const Dataset& data) {
    CurveContext ctx(std::make_shared<const Dataset>(data), PcParams{});
    Vector origin = column_mean(data);
    if (ctx.nearest_distance(origin) > ctx.params().d_out) {
        auto nn = ctx.index().knn({origin.data(), static_cast<std::size_t>(origin.size())}, 1);
        origin = data.point(nn[0].index);
    }
    return origin;
}

std::vector<PcParams> default_pc_grid(const Dataset& data) {
    const double s = data_scale(data);
    std::vector<PcParams> grid;
    for (double k : {0.01, 0.1, 0.3}) {
        for (double t : {0.02, 1.0, 3.0}) {
            for (double q : {2.0, 10.0, std::numeric_limits<double>::infinity()}) {
                PcParams p;
                p.k_frac = k;
                p.tau = t * s;
                p.q = q;
                grid.push_back(p);
            }
        }
    }
    return grid;
}

std::string format_error_surface(const std::vector<GridCell>& surface) {
    std::ostringstream out;
    out.precision(10);
    out << "k_frac,tau,q,error\n";
    for (const auto& cell : surface) {
        out << cell.params.k_frac << ',' << cell.params.tau << ',';
        if (std::isinf(cell.params.q)) out << "inf"; else out << cell.params.q;
        out << ',';
        if (std::isnan(cell.error)) out << "nan"; else out << cell.error;
        out << '\n';
    }
    return out.str();
}

}  // namespace spca
