#pragma once

#include "spca/model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace spca {

struct MiEstimate {
    double bits = 0.0;
    /// A column was constant; bits is 0.
    bool degenerate = false;
};

/// Plug-in histogram MI in bits over equal-width bins spanning each column's
/// observed range, clamped at 0. Requires N >= 10 * bins.
MiEstimate mutual_information(const std::vector<double>& a, const std::vector<double>& b, int bins = 32);
MiEstimate mutual_information(const Matrix& samples, int bins = 32);

/// Classical allocation b_i = B/d + log2(sigma_i^2 / geomean)/2, negative
/// shares dropped and redistributed, then largest-remainder rounding (ties to
/// the lower index). Returns bits per dimension summing to total_bits.
std::vector<int> bit_allocate(const std::vector<double>& variances, int total_bits);

struct QuantizerSpec {
    std::vector<long long> bins_per_dim;
    std::vector<std::pair<double, double>> ranges;

    void validate() const;
};

/// Ranges from the per-column min/max of `responses`, 2^bits bins per column.
QuantizerSpec make_quantizer(const Matrix& responses, const std::vector<int>& bits);

/// Mid-rise uniform quantization; values outside the range are clamped and
/// reported through `clamped`.
Vector quantize(const Vector& r, const QuantizerSpec& spec, bool* clamped = nullptr);

struct QuantizeResult {
    Matrix x_hat;
    /// sqrt(mean ||x - x_hat||^2 / d) over the successful rows.
    double rmse = 0.0;
    std::vector<bool> ok;
    Eigen::Index failures = 0;
    Eigen::Index clamped = 0;
};

/// Quantizes each response row, inverts it (out-of-range components clamped
/// to the attainable range of their curve) and measures the error against x.
QuantizeResult quantize_roundtrip(const Matrix& responses, const Matrix& x, const QuantizerSpec& spec,
                                  const SpcaModel& model);

struct Histogram2D {
    /// Row-conditional PDF values (rows sum to 1 when not empty).
    Matrix bins;
    Matrix counts;
    std::vector<bool> empty_row;
    std::vector<double> edges_a;
    std::vector<double> edges_b;
};

/// 2-d histogram of (a, b) with each a-row normalised to a conditional PDF of b.
Histogram2D conditional_hist(const Matrix& samples, int bins);

std::string format_histogram_csv(const Histogram2D& h);

struct BatchTransform {
    Matrix r;
    std::vector<Response> responses;
    /// Empty string for rows that transformed; failure message otherwise.
    std::vector<std::string> errors;

    Eigen::Index failures() const;
};

BatchTransform transform_batch(const SpcaModel& model, const PointMatrix& x, const TransformOptions& opts = {});

/// Label vote among neighbours sorted by distance: majority, ties to the
/// smallest label.
int majority_label(const std::vector<int>& labels);

/// k-NN in the whitened response space of a model.
class SpcaKnnClassifier {
public:
    SpcaKnnClassifier(const SpcaModel& model, const Dataset& train, const TransformOptions& opts = {});

    int classify(const Vector& query, Eigen::Index k) const;
    /// Whitened response of an input point.
    Vector embed(const Vector& x) const;
    Eigen::Index failed_training_points() const { return failed_; }

private:
    const SpcaModel* model_;
    TransformOptions opts_;
    PointMatrix embedded_;
    std::vector<int> labels_;
    Vector scale_;
    Eigen::Index failed_ = 0;
};

int knn_classify_spca(const SpcaModel& model, const Dataset& train, const Vector& query, Eigen::Index k,
                      const TransformOptions& opts = {});

/// Whitening by the inverse square root of the training covariance.
class MahalanobisKnn {
public:
    explicit MahalanobisKnn(const Dataset& train);
    int classify(const Vector& query, Eigen::Index k) const;

private:
    Matrix whiten_;
    PointMatrix embedded_;
    std::vector<int> labels_;
};

int euclidean_knn(const Dataset& train, const Vector& query, Eigen::Index k);

struct AdaptResult {
    Vector x_hat;
    bool converged = false;
    Response response_b;
};

/// inverse_A(transform_B(x_B)). Failures name the stage that raised them.
AdaptResult domain_adapt(const SpcaModel& model_a, const SpcaModel& model_b, const Vector& x_b,
                         const TransformOptions& opts = {}, bool clamp_inverse = false);

}  // namespace spca
