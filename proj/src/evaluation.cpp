#include "spca/evaluation.hpp"

#include "spca/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace spca {

namespace {

std::vector<int> bin_index(const std::vector<double>& v, int bins, bool* constant) {
    auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    std::vector<int> idx(v.size(), 0);
    *constant = !(hi > lo);
    if (*constant) return idx;
    const double width = (hi - lo) / bins;
    for (std::size_t i = 0; i < v.size(); ++i) {
        idx[i] = std::min(bins - 1, static_cast<int>((v[i] - lo) / width));
    }
    return idx;
}

double entropy_bits(const std::vector<double>& counts, double n) {
    double h = 0.0;
    for (double c : counts) {
        if (c > 0.0) h -= (c / n) * std::log2(c / n);
    }
    return h;
}

std::vector<double> column(const Matrix& m, Eigen::Index j) {
    return std::vector<double>(m.col(j).data(), m.col(j).data() + m.rows());
}

}  // namespace

MiEstimate mutual_information(const std::vector<double>& a, const std::vector<double>& b, int bins) {
    if (bins < 1) throw InvalidArgument("mutual_information: bins must be >= 1");
    if (a.size() != b.size()) throw InvalidArgument("mutual_information: column lengths differ");
    if (a.size() < 10 * static_cast<std::size_t>(bins)) {
        throw InvalidArgument("mutual_information: need N >= 10 * bins samples");
    }
    bool ca = false;
    bool cb = false;
    auto ia = bin_index(a, bins, &ca);
    auto ib = bin_index(b, bins, &cb);
    if (ca || cb) return {0.0, true};

    const auto nb = static_cast<std::size_t>(bins);
    std::vector<double> pa(nb, 0.0), pb(nb, 0.0), pab(nb * nb, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        auto x = static_cast<std::size_t>(ia[i]);
        auto y = static_cast<std::size_t>(ib[i]);
        pa[x] += 1.0;
        pb[y] += 1.0;
        pab[x * nb + y] += 1.0;
    }
    const double n = static_cast<double>(a.size());
    double mi = entropy_bits(pa, n) + entropy_bits(pb, n) - entropy_bits(pab, n);
    return {std::max(0.0, mi), false};
}

MiEstimate mutual_information(const Matrix& samples, int bins) {
    if (samples.cols() != 2) throw InvalidArgument("mutual_information: samples must be N x 2");
    return mutual_information(column(samples, 0), column(samples, 1), bins);
}

std::vector<int> bit_allocate(const std::vector<double>& variances, int total_bits) {
    if (total_bits < 0) throw InvalidArgument("bit_allocate: total_bits must be >= 0");
    if (variances.empty()) throw InvalidArgument("bit_allocate: no variances");
    for (double v : variances) {
        if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument("bit_allocate: variances must be positive");
    }
    const std::size_t d = variances.size();
    std::vector<double> share(d, 0.0);
    std::vector<bool> active(d, true);
    // Reverse water-filling: dimensions with a negative share get none.
    while (true) {
        double count = 0.0;
        double log_sum = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            if (active[i]) {
                count += 1.0;
                log_sum += std::log2(variances[i]);
            }
        }
        const double log_gm = log_sum / count;
        bool changed = false;
        for (std::size_t i = 0; i < d; ++i) {
            share[i] = active[i] ? total_bits / count + 0.5 * (std::log2(variances[i]) - log_gm) : 0.0;
        }
        for (std::size_t i = 0; i < d; ++i) {
            if (active[i] && share[i] < 0.0) {
                active[i] = false;
                changed = true;
            }
        }
        if (!changed) break;
    }

    std::vector<int> bits(d);
    int used = 0;
    for (std::size_t i = 0; i < d; ++i) {
        bits[i] = static_cast<int>(std::floor(share[i]));
        used += bits[i];
    }
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return share[a] - std::floor(share[a]) > share[b] - std::floor(share[b]);
    });
    for (std::size_t i = 0; used < total_bits; i = (i + 1) % d) {
        ++bits[order[i]];
        ++used;
    }
    return bits;
}

void QuantizerSpec::validate() const {
    if (bins_per_dim.size() != ranges.size() || bins_per_dim.empty()) {
        throw InvalidArgument("quantizer: bins and ranges must have the same non-zero length");
    }
    for (std::size_t i = 0; i < ranges.size(); ++i) {
        if (bins_per_dim[i] < 1) throw InvalidArgument("quantizer: bins must be >= 1");
        if (!(ranges[i].first < ranges[i].second)) throw InvalidArgument("quantizer: range min must be < max");
    }
}

QuantizerSpec make_quantizer(const Matrix& responses, const std::vector<int>& bits) {
    if (static_cast<Eigen::Index>(bits.size()) != responses.cols()) {
        throw InvalidArgument("make_quantizer: one bit count per column required");
    }
    QuantizerSpec spec;
    for (Eigen::Index j = 0; j < responses.cols(); ++j) {
        spec.ranges.emplace_back(responses.col(j).minCoeff(), responses.col(j).maxCoeff());
        spec.bins_per_dim.push_back(1LL << bits[static_cast<std::size_t>(j)]);
    }
    spec.validate();
    return spec;
}

Vector quantize(const Vector& r, const QuantizerSpec& spec, bool* clamped) {
    if (static_cast<std::size_t>(r.size()) != spec.ranges.size()) {
        throw InvalidArgument("quantize: dimension mismatch");
    }
    Vector out(r.size());
    bool any = false;
    for (Eigen::Index j = 0; j < r.size(); ++j) {
        const auto [lo, hi] = spec.ranges[static_cast<std::size_t>(j)];
        const auto n = spec.bins_per_dim[static_cast<std::size_t>(j)];
        const double width = (hi - lo) / static_cast<double>(n);
        double pos = std::floor((r(j) - lo) / width);
        if (r(j) < lo || r(j) > hi) any = true;
        pos = std::clamp(pos, 0.0, static_cast<double>(n - 1));
        out(j) = lo + (pos + 0.5) * width;
    }
    if (clamped) *clamped = any;
    return out;
}

QuantizeResult quantize_roundtrip(const Matrix& responses, const Matrix& x, const QuantizerSpec& spec,
                                  const SpcaModel& model) {
    spec.validate();
    if (responses.rows() != x.rows() || responses.cols() != x.cols()) {
        throw InvalidArgument("quantize_roundtrip: responses and inputs must have the same shape");
    }
    QuantizeResult out;
    out.x_hat = Matrix::Zero(x.rows(), x.cols());
    out.ok.assign(static_cast<std::size_t>(x.rows()), false);
    double sum = 0.0;
    Eigen::Index good = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        bool clamped = false;
        Vector q = quantize(responses.row(i).transpose(), spec, &clamped);
        if (clamped) ++out.clamped;
        try {
            Vector xh = inverse_clamped(model, q);
            out.x_hat.row(i) = xh.transpose();
            sum += (x.row(i).transpose() - xh).squaredNorm();
            out.ok[static_cast<std::size_t>(i)] = true;
            ++good;
        } catch (const InversionFailure&) {
            ++out.failures;
        }
    }
    out.rmse = good > 0 ? std::sqrt(sum / static_cast<double>(good * x.cols()))
                        : std::numeric_limits<double>::quiet_NaN();
    return out;
}

Histogram2D conditional_hist(const Matrix& samples, int bins) {
    if (samples.cols() != 2 || samples.rows() < 1) throw InvalidArgument("conditional_hist: samples must be N x 2");
    if (bins < 1) throw InvalidArgument("conditional_hist: bins must be >= 1");
    Histogram2D h;
    h.counts = Matrix::Zero(bins, bins);
    std::vector<int> idx[2];
    for (int c = 0; c < 2; ++c) {
        auto col = column(samples, c);
        bool constant = false;
        idx[c] = bin_index(col, bins, &constant);
        auto [lo, hi] = std::minmax_element(col.begin(), col.end());
        auto& edges = c == 0 ? h.edges_a : h.edges_b;
        for (int e = 0; e <= bins; ++e) edges.push_back(*lo + (*hi - *lo) * e / bins);
    }
    for (std::size_t i = 0; i < idx[0].size(); ++i) h.counts(idx[0][i], idx[1][i]) += 1.0;
    h.bins = h.counts;
    h.empty_row.assign(static_cast<std::size_t>(bins), false);
    for (int r = 0; r < bins; ++r) {
        double s = h.counts.row(r).sum();
        if (s > 0.0) {
            h.bins.row(r) /= s;
        } else {
            h.empty_row[static_cast<std::size_t>(r)] = true;
        }
    }
    return h;
}

std::string format_histogram_csv(const Histogram2D& h) {
    std::ostringstream out;
    out.precision(10);
    for (Eigen::Index r = 0; r < h.bins.rows(); ++r) {
        for (Eigen::Index c = 0; c < h.bins.cols(); ++c) {
            if (c) out << ',';
            out << h.bins(r, c);
        }
        out << '\n';
    }
    return out.str();
}

Eigen::Index BatchTransform::failures() const {
    return static_cast<Eigen::Index>(std::count_if(errors.begin(), errors.end(), [](const auto& e) {
        return !e.empty();
    }));
}

BatchTransform transform_batch(const SpcaModel& model, const PointMatrix& x, const TransformOptions& opts) {
    BatchTransform out;
    out.r = Matrix::Constant(x.rows(), x.cols(), std::numeric_limits<double>::quiet_NaN());
    out.responses.resize(static_cast<std::size_t>(x.rows()));
    out.errors.resize(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        try {
            Response resp = transform(model, x.row(i).transpose(), opts);
            out.r.row(i) = resp.r.transpose();
            out.responses[static_cast<std::size_t>(i)] = std::move(resp);
        } catch (const Error& e) {
            out.errors[static_cast<std::size_t>(i)] = e.what();
        }
    }
    return out;
}

int majority_label(const std::vector<int>& labels) {
    if (labels.empty()) throw InvalidArgument("majority_label: no labels");
    std::map<int, int> votes;
    for (int l : labels) ++votes[l];
    int best = votes.begin()->first;
    int best_count = 0;
    for (const auto& [label, count] : votes) {
        if (count > best_count) {
            best = label;
            best_count = count;
        }
    }
    return best;
}

namespace {

int vote_nearest(const PointMatrix& points, const std::vector<int>& labels, const Vector& q, Eigen::Index k) {
    if (k < 1 || k > points.rows()) throw InvalidArgument("knn classify: k must be in [1, N]");
    std::vector<Neighbor> all(static_cast<std::size_t>(points.rows()));
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        all[static_cast<std::size_t>(i)] = {squared_distance(q.data(), &points(i, 0), points.cols()), i};
    }
    std::partial_sort(all.begin(), all.begin() + k, all.end());
    std::vector<int> near;
    for (Eigen::Index i = 0; i < k; ++i) near.push_back(labels[static_cast<std::size_t>(all[static_cast<std::size_t>(i)].index)]);
    return majority_label(near);
}

const std::vector<int>& require_labels(const Dataset& train) {
    if (!train.labels) throw InvalidArgument("classifier: training set is unlabelled");
    return *train.labels;
}

}  // namespace

SpcaKnnClassifier::SpcaKnnClassifier(const SpcaModel& model, const Dataset& train, const TransformOptions& opts)
    : model_(&model), opts_(opts) {
    const auto& labels = require_labels(train);
    if (train.dim() != model.dim()) throw InvalidArgument("classifier: dimension mismatch");
    BatchTransform batch = transform_batch(model, train.points, opts);
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < train.size(); ++i) {
        if (batch.errors[static_cast<std::size_t>(i)].empty()) keep.push_back(i);
    }
    failed_ = train.size() - static_cast<Eigen::Index>(keep.size());
    if (keep.size() < 2) throw ClassificationFailure("classifier: fewer than 2 training points transformed");
    embedded_.resize(static_cast<Eigen::Index>(keep.size()), model.dim());
    for (std::size_t i = 0; i < keep.size(); ++i) {
        embedded_.row(static_cast<Eigen::Index>(i)) = batch.r.row(keep[i]);
        labels_.push_back(labels[static_cast<std::size_t>(keep[i])]);
    }
    Vector mean = embedded_.colwise().mean().transpose();
    scale_.resize(model.dim());
    for (Eigen::Index j = 0; j < model.dim(); ++j) {
        double var = (embedded_.col(j).array() - mean(j)).square().sum() / static_cast<double>(embedded_.rows() - 1);
        scale_(j) = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
    }
    for (Eigen::Index i = 0; i < embedded_.rows(); ++i) {
        embedded_.row(i) = embedded_.row(i).cwiseProduct(scale_.transpose());
    }
}

Vector SpcaKnnClassifier::embed(const Vector& x) const {
    try {
        return transform(*model_, x, opts_).r.cwiseProduct(scale_);
    } catch (const Error& e) {
        throw ClassificationFailure(std::string("classifier: query transform failed: ") + e.what());
    }
}

int SpcaKnnClassifier::classify(const Vector& query, Eigen::Index k) const {
    return vote_nearest(embedded_, labels_, embed(query), k);
}

int knn_classify_spca(const SpcaModel& model, const Dataset& train, const Vector& query, Eigen::Index k,
                      const TransformOptions& opts) {
    return SpcaKnnClassifier(model, train, opts).classify(query, k);
}

MahalanobisKnn::MahalanobisKnn(const Dataset& train) : labels_(require_labels(train)) {
    const Eigen::Index n = train.size();
    if (n < 2) throw InvalidArgument("MahalanobisKnn: need at least 2 samples");
    PointMatrix centered = train.points.rowwise() - train.points.colwise().mean();
    Matrix cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
    Vector inv_sqrt = eig.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
    whiten_ = inv_sqrt.asDiagonal() * eig.eigenvectors().transpose();
    embedded_ = (train.points * whiten_.transpose());
}

int MahalanobisKnn::classify(const Vector& query, Eigen::Index k) const {
    return vote_nearest(embedded_, labels_, whiten_ * query, k);
}

int euclidean_knn(const Dataset& train, const Vector& query, Eigen::Index k) {
    return vote_nearest(train.points, require_labels(train), query, k);
}

AdaptResult domain_adapt(const SpcaModel& model_a, const SpcaModel& model_b, const Vector& x_b,
                         const TransformOptions& opts, bool clamp_inverse) {
    if (model_a.dim() != model_b.dim()) throw InvalidArgument("domain_adapt: models differ in dimension");
    if (model_a.metric.gamma != model_b.metric.gamma) throw InvalidArgument("domain_adapt: models differ in gamma");
    AdaptResult out;
    try {
        out.response_b = transform(model_b, x_b, opts);
    } catch (const TransformFailure& e) {
        throw TransformFailure(std::string("domain_adapt, transform with model B: ") + e.what(), e.dimension());
    }
    try {
        out.x_hat = clamp_inverse ? inverse_clamped(model_a, out.response_b.r) : inverse(model_a, out.response_b.r);
    } catch (const InversionFailure& e) {
        throw InversionFailure(std::string("domain_adapt, inverse with model A: ") + e.what(), e.dimension(),
                               e.attainable_min(), e.attainable_max());
    }
    out.converged = out.response_b.converged;
    return out;
}

}  // namespace spca
