#include "spca/model.hpp"

#include "spca/errors.hpp"
#include "spca/stats.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace spca {

namespace {

constexpr int kEntropyBins = 64;
// Fewest tube samples accepted for a conditional density.
constexpr std::size_t kMinTube = 10;

std::vector<double> all_projections(const PrincipalCurve& curve, const Dataset& data) {
    std::vector<double> u(static_cast<std::size_t>(data.size()));
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        u[static_cast<std::size_t>(i)] = project_orthogonal(curve, data.point(i)).u;
    }
    return u;
}

Vector choose_origin(const CurveContext& ctx, OriginMode mode) {
    const Dataset& data = ctx.data();
    if (mode == OriginMode::Mean) {
        Vector mean = column_mean(data);
        if (ctx.nearest_distance(mean) <= ctx.params().d_out) return mean;
        auto nn = ctx.index().knn({mean.data(), static_cast<std::size_t>(mean.size())}, 1);
        return data.point(nn[0].index);
    }
    // Densest: smallest k-th neighbour distance, first sample on ties.
    Eigen::Index best = 0;
    double best_r = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        auto nn = ctx.index().knn({&data.points(i, 0), static_cast<std::size_t>(data.dim())}, ctx.k());
        if (nn.back().dist2 < best_r) {
            best_r = nn.back().dist2;
            best = i;
        }
    }
    return data.point(best);
}

std::shared_ptr<const CurveContext> make_context(std::shared_ptr<const Dataset> data, const PcParams& pc) {
    return std::make_shared<const CurveContext>(std::move(data), pc);
}

SpcaModel assemble(std::shared_ptr<const CurveContext> ctx, const MetricConfig& metric, OriginMode origin_mode,
                   double rate_bits, const Vector& origin, const Matrix& origin_basis,
                   const std::vector<Eigen::Index>& dim_order, const Vector& scaling, const Vector& entropy) {
    metric.validate();
    const Eigen::Index d = ctx->data().dim();
    if (origin.size() != d || origin_basis.rows() != d || origin_basis.cols() != d) {
        throw InvalidArgument("model: origin/basis dimension mismatch");
    }
    std::vector<Eigen::Index> sorted = dim_order;
    std::sort(sorted.begin(), sorted.end());
    for (Eigen::Index i = 0; i < d; ++i) {
        if (static_cast<Eigen::Index>(sorted.size()) != d || sorted[static_cast<std::size_t>(i)] != i) {
            throw InvalidArgument("model: dim_order is not a permutation of 0..d-1");
        }
    }
    if (scaling.size() != d || !(scaling.array() > 0.0).all()) {
        throw InvalidArgument("model: scaling must hold d positive values");
    }

    SpcaModel m;
    m.training = ctx->data_ptr();
    m.context = std::move(ctx);
    m.metric = metric;
    m.origin_mode = origin_mode;
    m.rate_bits = rate_bits;
    m.origin = origin;
    m.origin_basis = origin_basis;
    m.dim_order = dim_order;
    m.scaling = scaling;
    m.entropy = entropy;
    m.first_pc = draw_pc(*m.context, origin, origin_basis, dim_order[0], {});
    attach_density(m.first_pc, *m.training, metric);
    m.diameter = max_pairwise_distance(*m.training);
    return m;
}

// Walks levels [0, d). Levels >= project_from take their response from the
// orthogonal projection of *x onto the level's curve.
PathState walk_impl(const SpcaModel& model, Vector& r, bool clamp, const Vector* x, std::size_t project_from) {
    const auto d = static_cast<std::size_t>(model.dim());
    if (static_cast<std::size_t>(r.size()) != d) throw InvalidArgument("response dimension mismatch");
    PathState st;
    st.u.resize(d);
    st.points.resize(d);
    st.secondary.reserve(d > 0 ? d - 1 : 0);
    std::vector<const PrincipalCurve*> prior{&model.first_pc};

    for (std::size_t level = 0; level < d; ++level) {
        if (level > 0) {
            try {
                st.secondary.push_back(
                    draw_secondary(model, level, st.curve(model, level - 1), st.u[level - 1], prior));
            } catch (const TransformFailure&) {
                throw;
            } catch (const Error& e) {
                throw TransformFailure(std::string("cannot draw curve: ") + e.what(), level);
            }
            prior.push_back(&st.secondary.back().curve);
        }
        const PrincipalCurve& curve = st.curve(model, level);
        const double c = model.scaling(static_cast<Eigen::Index>(level));
        const double launch = curve.launch_coord();
        auto li = static_cast<Eigen::Index>(level);
        if (x && level >= project_from) {
            r(li) = c * metric_length(curve, launch, project_orthogonal(curve, *x).u, model.metric);
        }
        double u;
        try {
            u = inverse_metric_length(curve, launch, r(li) / c, model.metric);
        } catch (const OutOfRange& e) {
            if (!clamp) {
                throw InversionFailure("response component " + std::to_string(level) +
                                           " outside the attainable range",
                                       level, c * e.attainable_min(), c * e.attainable_max());
            }
            r(li) = c * (r(li) < 0.0 ? e.attainable_min() : e.attainable_max());
            u = inverse_metric_length(curve, launch, r(li) / c, model.metric);
        }
        st.u[level] = u;
        st.points[level] = point_at(curve, u);
    }
    return st;
}

double residual_of(const PathState& st, const Vector& x) { return (x - st.points.back()).norm(); }

}  // namespace

OriginMode parse_origin_mode(const std::string& s) {
    if (s == "mean") return OriginMode::Mean;
    if (s == "densest") return OriginMode::Densest;
    throw InvalidArgument("origin mode must be 'mean' or 'densest', got '" + s + "'");
}

const char* to_string(OriginMode m) { return m == OriginMode::Mean ? "mean" : "densest"; }

double max_pairwise_distance(const Dataset& data) {
    const Eigen::Index n = data.size();
    const Eigen::Index d = data.dim();
    double best = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double* a = &data.points(i, 0);
        for (Eigen::Index j = i + 1; j < n; ++j) {
            best = std::max(best, squared_distance(a, &data.points(j, 0), d));
        }
    }
    return std::sqrt(best);
}

SecondaryCurve draw_secondary(const SpcaModel& model, std::size_t level, const PrincipalCurve& parent, double u_parent,
                              const std::vector<const PrincipalCurve*>& prior) {
    const CurveContext& ctx = *model.context;
    const Vector launch = point_at(parent, u_parent);
    const LocalBasis& ref = parent.bases[static_cast<std::size_t>(nearest_vertex(parent, u_parent))];
    const Eigen::Index axis = model.dim_order[level];

    // Finer steps across thin directions so the conditional density is resolved.
    const double tau = ctx.params().tau;
    const double lam = ref.eigenvalues(axis);
    DrawOptions opts;
    opts.tau = lam > 0.0 ? std::min(tau, std::sqrt(lam) / 5.0) : tau;
    opts.require_origin_inside = false;

    SecondaryCurve out;
    out.curve = draw_pc(ctx, launch, ref.vectors, axis, prior, opts);

    // Conditional samples: those whose parent coordinate lies within w of the
    // launch, moved to the launch by carrying their offset from the parent
    // curve over from the local frame at their own foot to the frame at the
    // launch (this removes the bias the parent's curvature would add). Feet
    // landing exactly on a vertex of the new curve are dropped: samples in the
    // wedge outside a corner all land there and would form an atom.
    const PrincipalCurve& curve = out.curve;
    auto nb = ctx.index().knn({launch.data(), static_cast<std::size_t>(launch.size())}, ctx.k());
    double w = std::sqrt(nb.back().dist2);
    if (!(w > 0.0)) w = tau;
    double reach = 0.0;
    for (const auto& v : curve.vertices) reach = std::max(reach, (v - launch).norm());

    for (int attempt = 0; attempt < 4; ++attempt) {
        out.tube_coords.clear();
        auto cand = ctx.index().within({launch.data(), static_cast<std::size_t>(launch.size())}, reach + w);
        std::sort(cand.begin(), cand.end());
        for (auto i : cand) {
            const Vector xi = ctx.data().point(i);
            const Projection pp = project_orthogonal(parent, xi);
            if (std::abs(pp.u - u_parent) > w) continue;
            const Matrix& frame = parent.bases[static_cast<std::size_t>(nearest_vertex(parent, pp.u))].vectors;
            const Vector moved = launch + ref.vectors * (frame.transpose() * pp.residual);
            const Projection p = project_orthogonal(curve, moved);
            if (p.t > 0.0 && p.t < 1.0 && p.residual.norm() <= w) out.tube_coords.push_back(p.u);
        }
        out.tube_width = w;
        if (out.tube_coords.size() >= kMinTube) break;
        w *= 2.0;
    }
    if (out.tube_coords.size() < kMinTube) {
        throw TransformFailure("too few samples around the curve for a density estimate", level);
    }
    MetricConfig tube_cfg = model.metric;
    if (tube_cfg.density_k > 0) {
        tube_cfg.density_k = std::min<Eigen::Index>(tube_cfg.density_k,
                                                    static_cast<Eigen::Index>(out.tube_coords.size()));
    }
    attach_density(out.curve, out.tube_coords, tube_cfg);
    return out;
}

PathState walk(const SpcaModel& model, Vector& r, bool clamp) {
    return walk_impl(model, r, clamp, nullptr, static_cast<std::size_t>(model.dim()));
}

SpcaModel assemble_model(std::shared_ptr<const Dataset> data, const PcParams& resolved_pc, const MetricConfig& metric,
                         OriginMode origin_mode, double rate_bits, const Vector& origin, const Matrix& origin_basis,
                         const std::vector<Eigen::Index>& dim_order, const Vector& scaling, const Vector& entropy) {
    return assemble(make_context(std::move(data), resolved_pc), metric, origin_mode, rate_bits, origin, origin_basis,
                    dim_order, scaling, entropy);
}

SpcaModel fit(const Dataset& data, const SpcaConfig& cfg) {
    data.validate();
    cfg.metric.validate();
    const Eigen::Index d = data.dim();
    if (data.size() < 2 || !(data_scale(data) > 0.0)) {
        throw FitFailure("fit: training data has no spread (degenerate)");
    }
    const double rate_bits = cfg.rate_bits > 0.0 ? cfg.rate_bits : 3.0 * static_cast<double>(d);

    try {
        auto ctx = make_context(std::make_shared<const Dataset>(data), cfg.pc);
        const Dataset& train = ctx->data();

        Vector origin = choose_origin(*ctx, cfg.origin_mode);
        LocalBasis lb = ctx->basis_at(origin);
        if (lb.degenerate) throw FitFailure("fit: local PCA at the origin is degenerate");
        Matrix basis = lb.vectors;

        // One candidate curve per axis; order by marginal entropy of projections.
        std::vector<PrincipalCurve> candidates;
        candidates.reserve(static_cast<std::size_t>(d));
        std::vector<double> h(static_cast<std::size_t>(d));
        for (Eigen::Index a = 0; a < d; ++a) {
            std::vector<const PrincipalCurve*> prior;
            for (const auto& c : candidates) prior.push_back(&c);
            candidates.push_back(draw_pc(*ctx, origin, basis, a, prior));
            h[static_cast<std::size_t>(a)] = histogram_entropy(all_projections(candidates.back(), train), kEntropyBins);
        }
        std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
            return h[static_cast<std::size_t>(a)] > h[static_cast<std::size_t>(b)];
        });

        // Orientation: each axis points along the longer arm of its origin
        // curve, except the last one, which makes the frame right-handed.
        for (Eigen::Index level = 0; level < d; ++level) {
            const Eigen::Index a = order[static_cast<std::size_t>(level)];
            if (level == d - 1 && d > 1) {
                if (basis.determinant() < 0.0) basis.col(a) *= -1.0;
            } else {
                const PrincipalCurve& c = candidates[static_cast<std::size_t>(a)];
                if (c.launch_coord() > c.length() - c.launch_coord()) basis.col(a) *= -1.0;
            }
        }

        SpcaModel m = assemble(ctx, cfg.metric, cfg.origin_mode, rate_bits, origin, basis, order, Vector::Ones(d),
                               Vector());

        // Scaling from the curves of the origin path.
        Vector zero = Vector::Zero(d);
        PathState st = walk(m, zero, false);
        Vector entropy(d);
        Vector lengths(d);
        for (Eigen::Index level = 0; level < d; ++level) {
            const auto l = static_cast<std::size_t>(level);
            entropy(level) = level == 0 ? histogram_entropy(all_projections(m.first_pc, train), kEntropyBins)
                                        : histogram_entropy(st.secondary[l - 1].tube_coords, kEntropyBins);
            lengths(level) = total_metric_length(st.curve(m, l), m.metric);
            if (!std::isfinite(entropy(level)) || !(lengths(level) > 0.0)) {
                throw FitFailure("fit: degenerate marginal along level " + std::to_string(level));
            }
        }
        const double shift = (rate_bits - entropy.sum()) / static_cast<double>(d);
        for (Eigen::Index level = 0; level < d; ++level) {
            m.scaling(level) = std::exp2(entropy(level) + shift) / lengths(level);
        }
        m.entropy = entropy;
        return m;
    } catch (const FitFailure&) {
        throw;
    } catch (const Error& e) {
        throw FitFailure(std::string("fit: ") + e.what());
    }
}

Response transform(const SpcaModel& model, const Vector& x, const TransformOptions& opts) {
    const Eigen::Index d = model.dim();
    if (x.size() != d) throw InvalidArgument("transform: input dimension mismatch");
    if (!x.allFinite()) throw InvalidArgument("transform: non-finite input");
    if (!(opts.tol_frac >= 0.0) || !(opts.alpha > 0.0) || opts.max_iter < 0 || !(opts.alpha_growth >= 1.0)) {
        throw InvalidArgument("transform: invalid iteration options");
    }
    if (model.context->nearest_distance(x) > 3.0 * model.pc_params().d_out) {
        throw TransformFailure("input lies outside the training support (3 * d_out)", 0);
    }
    const double tol = opts.tol_frac * model.diameter;
    const auto last = static_cast<std::size_t>(d - 1);

    Vector r = Vector::Zero(d);
    PathState st = walk_impl(model, r, true, &x, 0);
    double res = residual_of(st, x);

    Response out;
    out.residual_history.push_back(res);
    double alpha = opts.alpha;
    const bool adaptive = opts.alpha_growth > 1.0;
    int rises = 0;

    // Best state seen so far; in fixed-step mode the iterate moves regardless.
    Vector best_r = r;
    PathState best_st = st;
    double best_res = res;

    // Secant (Barzilai-Borwein) step length from the last accepted move.
    Vector prev_r;
    Vector prev_step;

    int it = 0;
    while (best_res > tol && it < opts.max_iter && d > 1) {
        ++it;
        const PrincipalCurve& tail = st.curve(model, last);
        const LocalBasis& basis = tail.bases[static_cast<std::size_t>(nearest_vertex(tail, st.u[last]))];
        const Vector err = x - st.points[last];
        Vector step = Vector::Zero(d);
        for (std::size_t level = 0; level < last; ++level) {
            const auto li = static_cast<Eigen::Index>(level);
            double g = metric_weight(st.curve(model, level), st.u[level], model.metric.gamma);
            step(li) = model.scaling(li) * g * basis.vectors.col(model.dim_order[level]).dot(err);
        }
        if (adaptive && prev_r.size() == d) {
            const Vector dr = r - prev_r;
            const double curv = dr.dot(step - prev_step);
            if (curv < 0.0) alpha = std::min(opts.alpha_max, -dr.squaredNorm() / curv);
        }
        Vector cand = r + alpha * step;
        double cand_res = std::numeric_limits<double>::infinity();
        PathState cand_st;
        try {
            cand_st = walk_impl(model, cand, true, &x, last);
            cand_res = residual_of(cand_st, x);
        } catch (const TransformFailure&) {
        }
        out.residual_history.push_back(cand_res);

        if (adaptive) {
            if (cand_res < res) {
                prev_r = r;
                prev_step = step;
                r = cand;
                st = std::move(cand_st);
                res = cand_res;
                alpha = std::min(opts.alpha_max, alpha * opts.alpha_growth);
            } else {
                prev_r.resize(0);
                alpha *= 0.5;
            }
        } else {
            if (!std::isfinite(cand_res)) break;
            rises = cand_res > res ? rises + 1 : 0;
            if (rises >= 2) {
                alpha *= 0.5;
                rises = 0;
            }
            r = cand;
            st = std::move(cand_st);
            res = cand_res;
        }
        if (res < best_res) {
            best_r = r;
            best_st = st;
            best_res = res;
        }
    }

    out.r = best_r;
    out.iterations = it;
    out.final_residual = best_res;
    out.converged = best_res <= tol;
    out.metric_diag.resize(d);
    for (Eigen::Index level = 0; level < d; ++level) {
        const auto l = static_cast<std::size_t>(level);
        out.metric_diag(level) = metric_weight(best_st.curve(model, l), best_st.u[l], model.metric.gamma);
    }
    return out;
}

Vector inverse(const SpcaModel& model, const Vector& r) {
    Vector rr = r;
    try {
        return walk(model, rr, false).points.back();
    } catch (const TransformFailure& e) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        throw InversionFailure(e.what(), e.dimension(), nan, nan);
    }
}

Vector inverse_clamped(const SpcaModel& model, const Vector& r) {
    Vector rr = r;
    try {
        return walk(model, rr, true).points.back();
    } catch (const TransformFailure& e) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        throw InversionFailure(e.what(), e.dimension(), nan, nan);
    }
}

Reduction reduce(const SpcaModel& model, const Vector& x, Eigen::Index d_keep, const TransformOptions& opts) {
    const Eigen::Index d = model.dim();
    if (d_keep < 1 || d_keep > d) throw InvalidArgument("reduce: d_keep must be in [1, d]");
    Reduction out;
    out.response = transform(model, x, opts);
    out.r_reduced = out.response.r.head(d_keep);
    Vector r = Vector::Zero(d);
    r.head(d_keep) = out.r_reduced;
    out.x_hat = inverse(model, r);
    return out;
}

}  // namespace spca
