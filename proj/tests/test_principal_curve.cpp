#include "spca/errors.hpp"
#include "spca/generators.hpp"
#include "spca/principal_curve.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

using namespace spca;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Dataset noisy_circle(Eigen::Index n, double radius, double sigma, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
    std::normal_distribution<double> g(0.0, sigma);
    PointMatrix p(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double a = u(rng);
        const double r = radius + g(rng);
        p.row(i) << r * std::cos(a), r * std::sin(a);
    }
    return Dataset(std::move(p));
}

// Samples uniform along x in [-10, 10] with Gaussian noise of std sigma in
// the remaining coordinates.
Dataset noisy_line(Eigen::Index n, Eigen::Index d, double sigma, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    std::normal_distribution<double> g(0.0, sigma);
    PointMatrix p(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        p(i, 0) = u(rng);
        for (Eigen::Index j = 1; j < d; ++j) p(i, j) = g(rng);
    }
    return Dataset(std::move(p));
}

PrincipalCurve straight_curve(int vertices, double spacing, double x0 = 0.0) {
    PrincipalCurve c;
    for (int i = 0; i < vertices; ++i) {
        Vector v(2);
        v << x0 + i * spacing, 0.0;
        c.vertices.push_back(v);
        c.bases.push_back(LocalBasis{Matrix::Identity(2, 2), Vector::Ones(2), false});
        c.cum_len.push_back(i * spacing);
    }
    return c;
}

void expect_curve_invariants(const PrincipalCurve& c, double tau) {
    ASSERT_GE(c.size(), 2);
    EXPECT_EQ(c.cum_len.front(), 0.0);
    for (Eigen::Index i = 0; i + 1 < c.size(); ++i) {
        const auto a = static_cast<std::size_t>(i);
        EXPECT_NEAR((c.vertices[a + 1] - c.vertices[a]).norm(), tau, 1e-6 * tau);
        EXPECT_GT(c.cum_len[a + 1], c.cum_len[a]);
    }
    for (const auto& b : c.bases) {
        const auto d = b.vectors.cols();
        EXPECT_LE((b.vectors.transpose() * b.vectors - Matrix::Identity(d, d)).norm(), 1e-9);
    }
    EXPECT_NE(c.stop_forward, StopReason::None);
    EXPECT_NE(c.stop_backward, StopReason::None);
}

}  // namespace

TEST(DrawPc, ExactLineIsColinear) {
    PointMatrix p(500, 2);
    for (int i = 0; i < 500; ++i) p.row(i) << 0.02 * i, 0.01 * i;
    Dataset d(p);
    PcParams params;
    params.q = kInf;
    params.tau = 0.2;
    PrincipalCurve c = draw_pc(d, column_mean(d), Matrix::Identity(2, 2), 0, params);
    expect_curve_invariants(c, 0.2);
    for (const auto& v : c.vertices) EXPECT_LE(std::abs(v(0) * 0.01 - v(1) * 0.02) / std::hypot(0.01, 0.02), 1e-6);
    // Every step direction agrees with the global principal axis.
    const Vector axis = Vector(Eigen::Vector2d(2.0, 1.0).normalized());
    for (std::size_t i = 0; i + 1 < c.vertices.size(); ++i) {
        EXPECT_GE(std::abs((c.vertices[i + 1] - c.vertices[i]).normalized().dot(axis)), 1.0 - 1e-9);
    }
    // The line ends inside the data: both ends leave the manifold.
    EXPECT_EQ(c.stop_forward, StopReason::OutOfManifold);
    EXPECT_EQ(c.stop_backward, StopReason::OutOfManifold);
}

TEST(DrawPc, NoisyCircleFollowsTheRing) {
    const double sigma = 0.2;
    Dataset d = noisy_circle(2000, 10.0, sigma, 4);
    PcParams params;
    params.k_frac = 0.1;
    params.tau = 1.0;
    params.q = 10.0;
    // The ring is sparse at the curve's equilibrium offset; the default d_out
    // ends it after a quarter turn.
    params.d_out = 1.0;
    Vector origin(2);
    origin << 10.0, 0.0;
    PrincipalCurve c = draw_pc(d, origin, Matrix::Identity(2, 2), 1, params);
    expect_curve_invariants(c, 1.0);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < d.size(); ++i) sum += project_orthogonal(c, d.point(i)).residual.norm();
    EXPECT_LE(sum / static_cast<double>(d.size()), 2.0 * sigma);
}

TEST(DrawPc, LargeNeighbourhoodIsMoreRigidOnSpiral) {
    Dataset d = gen_noisy_spiral(3000, 1);
    CurveContext base(std::make_shared<const Dataset>(d), PcParams{});
    Vector origin = column_mean(d);
    if (base.nearest_distance(origin) > base.params().d_out) {
        origin = d.point(knn(base.index(), origin, 1).indices[0]);
    }
    auto error_at = [&](double k_frac) {
        PcParams p;
        p.k_frac = k_frac;
        PrincipalCurve c = draw_pc(d, origin, Matrix::Identity(2, 2), 0, p);
        return projection_error(c, d);
    };
    EXPECT_GT(error_at(0.3), error_at(0.1));
}

TEST(DrawPc, OriginOutsideRejected) {
    Dataset d = gen_noisy_spiral(500, 1);
    Vector far = Vector::Constant(2, 1e3);
    EXPECT_THROW(draw_pc(d, far, Matrix::Identity(2, 2), 0, PcParams{}), InvalidArgument);
}

TEST(DrawPc, DegenerateOriginRejected) {
    PointMatrix p = PointMatrix::Zero(20, 2);
    p.row(19) << 50.0, 50.0;
    Dataset d(p);
    PcParams params;
    params.tau = 0.1;
    params.d_out = 1.0;
    EXPECT_THROW(draw_pc(d, Vector::Zero(2), Matrix::Identity(2, 2), 0, params), DegenerateGeometry);
}

TEST(DrawPc, StiffLimitMatchesInfiniteQ) {
    Dataset d = gen_noisy_spiral(2000, 3);
    const Vector origin = d.point(100);
    PcParams a;
    a.q = kInf;
    PcParams b = a;
    b.q = 1e12;
    PrincipalCurve ca = draw_pc(d, origin, Matrix::Identity(2, 2), 0, a);
    PrincipalCurve cb = draw_pc(d, origin, Matrix::Identity(2, 2), 0, b);
    ASSERT_EQ(ca.size(), cb.size());
    for (std::size_t i = 0; i < ca.vertices.size(); ++i) EXPECT_LE((ca.vertices[i] - cb.vertices[i]).norm(), 1e-6);
}

TEST(DrawPc, StopsOnCrossingPriorCurve) {
    // Vertical strip crossed by a horizontal polyline at y = 0.
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> ux(-0.5, 0.5);
    std::uniform_real_distribution<double> uy(-10.0, 10.0);
    PointMatrix p(2000, 2);
    for (int i = 0; i < 2000; ++i) p.row(i) << ux(rng), uy(rng);
    Dataset d(p);
    PrincipalCurve horizontal = straight_curve(21, 0.5, -5.0);
    PcParams params;
    params.tau = 0.2;
    params.q = kInf;
    CurveContext ctx(std::make_shared<const Dataset>(d), params);
    DrawOptions opts;
    opts.bidirectional = false;
    Vector start(2);
    start << 0.0, -5.0;
    PrincipalCurve vertical = draw_pc(ctx, start, Matrix::Identity(2, 2), 1, {&horizontal}, opts);
    EXPECT_EQ(vertical.stop_forward, StopReason::Crossing);
    EXPECT_LE(distance_to_curve(horizontal, vertical.vertices.back()), ctx.params().cross_tol);
    EXPECT_NEAR(vertical.vertices.back()(1), 0.0, ctx.params().cross_tol);
}

TEST(DrawPc, MaxVerticesBoundsEachDirection) {
    Dataset d = gen_noisy_spiral(2000, 1);
    PcParams params;
    params.max_vertices = 5;
    PrincipalCurve c = draw_pc(d, d.point(10), Matrix::Identity(2, 2), 0, params);
    EXPECT_LE(c.size(), 9);
    EXPECT_TRUE(c.stop_forward == StopReason::MaxVertices || c.stop_backward == StopReason::MaxVertices);
}

TEST(DrawPc, InvariantsOnSeveralDatasets) {
    const Dataset sets[] = {gen_noisy_spiral(2000, 5), gen_curve3d(1500, 5), gen_swiss_roll(1500, 0.3, 5)};
    for (const auto& d : sets) {
        CurveContext ctx(std::make_shared<const Dataset>(d), PcParams{});
        const Vector origin = d.point(0);
        PrincipalCurve c = draw_pc(ctx, origin, Matrix::Identity(d.dim(), d.dim()), 0, {});
        expect_curve_invariants(c, ctx.params().tau);
        // The launch vertex is the origin.
        EXPECT_LE((c.vertices[static_cast<std::size_t>(c.launch_index)] - origin).norm(), 1e-12);
    }
}

TEST(ResolveParams, Defaults) {
    Dataset d = gen_noisy_spiral(1000, 2);
    PointIndex index(d.points);
    PcParams r = resolve_params(PcParams{}, d, index);
    EXPECT_DOUBLE_EQ(r.tau, 0.05 * data_scale(d));
    EXPECT_DOUBLE_EQ(r.d_out, 3.0 * median_nn_distance(d, index));
    EXPECT_DOUBLE_EQ(r.cross_tol, r.tau / 2.0);
    EXPECT_EQ(r.max_vertices, static_cast<Eigen::Index>(std::ceil(10.0 * std::sqrt(1000.0))));
    EXPECT_EQ(r.neighbors(1000), 100);
}

TEST(PcParamsValidate, RejectsBadValues) {
    PcParams p;
    p.q = -1.0;
    EXPECT_THROW(p.validate(100), InvalidArgument);
    p = PcParams{};
    p.k_frac = 0.01;
    EXPECT_THROW(p.validate(100), InvalidArgument);  // ceil(0.01 * 100) = 1 < 2
    p = PcParams{};
    p.k_frac = 1.5;
    EXPECT_THROW(p.validate(100), InvalidArgument);
}

TEST(Project, VertexMapsToItsCoordinate) {
    PrincipalCurve c = straight_curve(6, 0.5);
    for (std::size_t j = 0; j < 6; ++j) {
        Projection p = project_orthogonal(c, c.vertices[j]);
        EXPECT_DOUBLE_EQ(p.u, c.cum_len[j]);
        EXPECT_EQ(p.residual.norm(), 0.0);
    }
}

TEST(Project, ClampsOffTheEnds) {
    PrincipalCurve c = straight_curve(6, 0.5);
    Vector before(2);
    before << -3.0, 1.0;
    Vector after(2);
    after << 9.0, -1.0;
    EXPECT_EQ(project_orthogonal(c, before).u, 0.0);
    EXPECT_EQ(project_orthogonal(c, after).u, c.length());
    EXPECT_TRUE(project_orthogonal(c, after).residual.isApprox(after - c.vertices.back()));
}

TEST(Project, MatchesDenseSampling) {
    Dataset d = gen_noisy_spiral(2000, 6);
    PcParams params;
    params.k_frac = 0.05;
    params.q = 2.0;
    params.d_out = 0.3;
    PrincipalCurve c = draw_pc(d, d.point(0), Matrix::Identity(2, 2), 0, params);
    const double tau = (c.vertices[1] - c.vertices[0]).norm();
    std::mt19937_64 rng(6);
    std::uniform_int_distribution<Eigen::Index> pick(0, d.size() - 1);
    for (int trial = 0; trial < 100; ++trial) {
        const Vector x = d.point(pick(rng));
        // Oracle: the closest of the polyline points spaced tau / 1000 apart.
        double best_u = 0.0;
        double best_d = std::numeric_limits<double>::infinity();
        const int steps = static_cast<int>(std::ceil(c.length() / (tau / 1000.0)));
        for (int s = 0; s <= steps; ++s) {
            const double u = c.length() * s / steps;
            const double dist = (point_at(c, u) - x).squaredNorm();
            if (dist < best_d) {
                best_d = dist;
                best_u = u;
            }
        }
        Projection p = project_orthogonal(c, x);
        EXPECT_NEAR(p.u, best_u, tau / 500.0) << "trial " << trial;
        EXPECT_TRUE(p.residual.isApprox(x - point_at(c, p.u), 1e-9));
    }
}

TEST(ProjectionError, ZeroOnCurve) {
    PrincipalCurve c = straight_curve(5, 1.0);
    PointMatrix p(3, 2);
    p << 0.5, 0, 2, 0, 3.7, 0;
    EXPECT_EQ(projection_error(c, Dataset(p)), 0.0);
}

TEST(ProjectionError, ConstantOffsetGivesSquare) {
    PrincipalCurve c = straight_curve(5, 1.0);
    PointMatrix p(4, 2);
    p << 0.5, 0.3, 2, -0.3, 3.7, 0.3, 1, -0.3;
    EXPECT_NEAR(projection_error(c, Dataset(p)), 0.09, 1e-15);
}

TEST(ProjectionError, EmptyRejected) {
    PrincipalCurve c = straight_curve(5, 1.0);
    EXPECT_THROW(projection_error(c, Dataset(PointMatrix(0, 2))), InvalidArgument);
}

TEST(ProjectionError, NoisyLineMatchesNoiseVariance) {
    for (Eigen::Index dim : {2, 3}) {
        const double sigma = 0.3;
        Dataset d = noisy_line(5000, dim, sigma, 7);
        PcParams params;
        params.q = kInf;
        PrincipalCurve c = draw_pc(d, column_mean(d), Matrix::Identity(dim, dim), 0, params);
        const double expected = sigma * sigma * static_cast<double>(dim - 1);
        EXPECT_NEAR(projection_error(c, d), expected, 0.15 * expected) << "d=" << dim;
    }
}

TEST(FitPcParams, SingleCell) {
    Dataset d = gen_noisy_spiral(1000, 1);
    PcParams p;
    p.k_frac = 0.1;
    PcFitResult r = fit_pc_params(d, {p}, d.point(0));
    EXPECT_EQ(r.best_index, 0u);
    ASSERT_EQ(r.surface.size(), 1u);
    EXPECT_TRUE(std::isfinite(r.surface[0].error));
}

TEST(FitPcParams, RigidityHarmlessOnLine) {
    Dataset d = noisy_line(2000, 2, 0.3, 9);
    PcParams a;
    a.k_frac = 0.05;
    PcParams b;
    b.k_frac = 0.5;
    PcFitResult r = fit_pc_params(d, {a, b}, column_mean(d));
    const double ea = r.surface[0].error;
    const double eb = r.surface[1].error;
    EXPECT_LE(std::abs(ea - eb), 0.05 * std::min(ea, eb));
}

TEST(FitPcParams, TiesGoToFirstCell) {
    Dataset d = gen_noisy_spiral(1000, 1);
    PcParams p;
    PcFitResult r = fit_pc_params(d, {p, p, p}, d.point(0));
    EXPECT_EQ(r.best_index, 0u);
}

TEST(FitPcParams, AllCellsFailing) {
    Dataset d = gen_noisy_spiral(500, 1);
    PcParams p;
    p.d_out = 1e-9;
    try {
        fit_pc_params(d, {p}, Vector::Constant(2, 50.0));
        FAIL() << "expected FitFailure";
    } catch (const FitFailure& e) {
        EXPECT_NE(std::string(e.what()).find("cell 0"), std::string::npos) << e.what();
    }
}

TEST(FitPcParams, DefaultGridAndSurfaceCsv) {
    Dataset d = gen_noisy_spiral(500, 1);
    auto grid = default_pc_grid(d);
    ASSERT_EQ(grid.size(), 27u);
    const double s = data_scale(d);
    EXPECT_DOUBLE_EQ(grid.front().k_frac, 0.01);
    EXPECT_DOUBLE_EQ(grid.front().tau, 0.02 * s);
    EXPECT_EQ(grid.front().q, 2.0);
    EXPECT_TRUE(std::isinf(grid.back().q));
    EXPECT_DOUBLE_EQ(grid.back().tau, 3.0 * s);
    GridCell cell;
    cell.params.k_frac = 0.1;
    cell.params.tau = 0.5;
    cell.params.q = kInf;
    cell.error = 0.25;
    EXPECT_EQ(format_error_surface({cell}), "k_frac,tau,q,error\n0.1,0.5,inf,0.25\n");
}
