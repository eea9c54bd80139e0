#pragma once

#include "spca/density_metric.hpp"
#include "spca/errors.hpp"
#include "spca/principal_curve.hpp"

#include <memory>
#include <string>
#include <vector>

namespace spca {

enum class OriginMode { Mean, Densest };

OriginMode parse_origin_mode(const std::string& s);
const char* to_string(OriginMode m);

struct SpcaConfig {
    MetricConfig metric;
    PcParams pc;
    OriginMode origin_mode = OriginMode::Mean;
    /// Total bits shared among the dimensions when setting C. 0: 3 * d.
    double rate_bits = 0.0;
};

/// A curve drawn during a path walk together with the samples used for its
/// conditional density.
struct SecondaryCurve {
    PrincipalCurve curve;
    /// Arc coordinates of the tube samples.
    std::vector<double> tube_coords;
    double tube_width = 0.0;
};

class SpcaModel {
public:
    std::shared_ptr<const Dataset> training;
    std::shared_ptr<const CurveContext> context;
    MetricConfig metric;
    OriginMode origin_mode = OriginMode::Mean;
    double rate_bits = 0.0;

    Vector origin;
    Matrix origin_basis;
    /// Level i of the path follows column dim_order[i] of the local bases.
    std::vector<Eigen::Index> dim_order;
    /// C per level.
    Vector scaling;
    /// Marginal entropy (bits) per level, used for the bit allocation.
    Vector entropy;
    PrincipalCurve first_pc;
    /// Largest pairwise distance among the training samples.
    double diameter = 0.0;

    Eigen::Index dim() const noexcept { return origin.size(); }
    const PcParams& pc_params() const noexcept { return context->params(); }
};

/// Curves and points visited by one walk along the sequential path.
struct PathState {
    /// Levels 1..d-1; level 0 is the model's first_pc.
    std::vector<SecondaryCurve> secondary;
    /// Arc coordinate per level.
    std::vector<double> u;
    /// Point reached per level (the last one is the reconstruction).
    std::vector<Vector> points;

    const PrincipalCurve& curve(const SpcaModel& m, std::size_t level) const {
        return level == 0 ? m.first_pc : secondary[level - 1].curve;
    }
};

struct TransformOptions {
    double tol_frac = 1e-3;
    /// Initial step factor of the geodesic refinement.
    double alpha = 0.01;
    int max_iter = 50;
    /// > 1: adaptive step. Alpha comes from a secant estimate over the last
    /// accepted move when one is available, otherwise it grows by this factor
    /// after an accepted step; rejected steps halve it. Capped at alpha_max.
    /// 1 keeps alpha fixed and halves it after two consecutive residual
    /// increases instead.
    double alpha_growth = 2.0;
    double alpha_max = 1e3;
};

struct Response {
    Vector r;
    bool converged = false;
    int iterations = 0;
    double final_residual = 0.0;
    /// Metric weight p^gamma per level at the reached point.
    Vector metric_diag;
    /// Residual after the initial projection and after every iteration.
    std::vector<double> residual_history;
};

/// Builds the model from training data. Throws FitFailure on degenerate input.
SpcaModel fit(const Dataset& data, const SpcaConfig& cfg);

/// Rebuilds a model from its stored state (used by the JSON loader).
SpcaModel assemble_model(std::shared_ptr<const Dataset> data, const PcParams& resolved_pc, const MetricConfig& metric,
                         OriginMode origin_mode, double rate_bits, const Vector& origin, const Matrix& origin_basis,
                         const std::vector<Eigen::Index>& dim_order, const Vector& scaling, const Vector& entropy);

/// Draws the level-th curve of a path from arc coordinate u_parent on parent.
SecondaryCurve draw_secondary(const SpcaModel& model, std::size_t level, const PrincipalCurve& parent, double u_parent,
                              const std::vector<const PrincipalCurve*>& prior);

/// Walks the path for response r. With clamp set, out-of-range components are
/// clamped (and written back into r); otherwise InversionFailure is thrown.
PathState walk(const SpcaModel& model, Vector& r, bool clamp);

Response transform(const SpcaModel& model, const Vector& x, const TransformOptions& opts = {});

Vector inverse(const SpcaModel& model, const Vector& r);

/// inverse with out-of-range components clamped to the attainable range.
Vector inverse_clamped(const SpcaModel& model, const Vector& r);

struct Reduction {
    Vector r_reduced;
    Vector x_hat;
    Response response;
};

Reduction reduce(const SpcaModel& model, const Vector& x, Eigen::Index d_keep, const TransformOptions& opts = {});

/// Largest pairwise Euclidean distance.
double max_pairwise_distance(const Dataset& data);

}  // namespace spca
