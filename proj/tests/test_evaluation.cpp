#include "spca/errors.hpp"
#include "spca/evaluation.hpp"
#include "spca/generators.hpp"
#include "spca/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

using namespace spca;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Matrix gaussian_pair(Eigen::Index n, double rho, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Matrix m(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double a = g(rng);
        m(i, 0) = a;
        m(i, 1) = rho * a + std::sqrt(1.0 - rho * rho) * g(rng);
    }
    return m;
}

std::vector<double> column(const Matrix& m, Eigen::Index j) { return {m.col(j).data(), m.col(j).data() + m.rows()}; }

SpcaConfig spiral_config(double gamma) {
    SpcaConfig cfg;
    cfg.metric.gamma = gamma;
    cfg.pc.k_frac = 0.05;
    cfg.pc.d_out = 0.3;
    cfg.pc.q = 2.0;
    return cfg;
}

const SpcaModel& spiral_model() {
    static const SpcaModel m = fit(gen_noisy_spiral(2000, 1), spiral_config(1.0 / 3.0));
    return m;
}

}  // namespace

TEST(MutualInformation, IndependentUniforms) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u;
    Matrix m(20000, 2);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
    EXPECT_LE(mutual_information(m, 32).bits, 0.05);
}

TEST(MutualInformation, SelfInformationIsLogBins) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u;
    std::vector<double> a(20000);
    for (auto& v : a) v = u(rng);
    EXPECT_NEAR(mutual_information(a, a, 32).bits, 5.0, 0.5);
}

TEST(MutualInformation, CorrelatedGaussian) {
    const double rho = 0.8;
    Matrix m = gaussian_pair(50000, rho, 3);
    EXPECT_NEAR(mutual_information(m, 32).bits, -0.5 * std::log2(1.0 - rho * rho), 0.1);
}

TEST(MutualInformation, ConstantColumnIsDegenerate) {
    std::vector<double> a(1000, 2.0);
    std::vector<double> b(1000);
    std::iota(b.begin(), b.end(), 0.0);
    MiEstimate mi = mutual_information(a, b, 10);
    EXPECT_TRUE(mi.degenerate);
    EXPECT_EQ(mi.bits, 0.0);
}

TEST(MutualInformation, TooFewSamplesRejected) {
    std::vector<double> a(100, 1.0);
    EXPECT_THROW(mutual_information(a, a, 32), InvalidArgument);
}

TEST(MutualInformation, SymmetricAndMonotoneInvariant) {
    Matrix m = gaussian_pair(50000, 0.6, 4);
    const auto a = column(m, 0);
    const auto b = column(m, 1);
    EXPECT_NEAR(mutual_information(a, b, 32).bits, mutual_information(b, a, 32).bits, 1e-12);
    std::vector<double> ta(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) ta[i] = 2.0 * a[i] + std::tanh(a[i] / 3.0);
    EXPECT_NEAR(mutual_information(ta, b, 32).bits, mutual_information(a, b, 32).bits, 0.05);
}

TEST(BitAllocate, EqualVariances) {
    EXPECT_EQ(bit_allocate({1.0, 1.0, 1.0, 1.0}, 8), (std::vector<int>{2, 2, 2, 2}));
}

TEST(BitAllocate, TwoVariances) {
    // 2.5 and 1.5 tie on the remainder; the lower index takes the extra bit.
    const auto b = bit_allocate({4.0, 1.0}, 4);
    EXPECT_EQ(b[0] + b[1], 4);
    EXPECT_GE(b[0], b[1]);
    EXPECT_EQ(b, (std::vector<int>{3, 1}));
}

TEST(BitAllocate, SingleVariance) { EXPECT_EQ(bit_allocate({0.3}, 7), (std::vector<int>{7})); }

TEST(BitAllocate, NegativeSharesDropped) {
    // 6/2 + log2(1e6)/2 exceeds the budget: the small variance gets nothing.
    EXPECT_EQ(bit_allocate({1e6, 1.0}, 6), (std::vector<int>{6, 0}));
}

TEST(BitAllocate, InvalidInputs) {
    EXPECT_THROW(bit_allocate({1.0, 2.0}, -1), InvalidArgument);
    EXPECT_THROW(bit_allocate({1.0, 0.0}, 4), InvalidArgument);
}

TEST(BitAllocate, BudgetPreserved) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> v(1 + t % 6);
        for (auto& x : v) x = std::exp(u(rng));
        const int total = t % 17;
        const auto b = bit_allocate(v, total);
        EXPECT_EQ(std::accumulate(b.begin(), b.end(), 0), total);
        for (int x : b) EXPECT_GE(x, 0);
    }
}

TEST(Quantize, MidRiseAndClamp) {
    QuantizerSpec s;
    s.bins_per_dim = {4};
    s.ranges = {{0.0, 4.0}};
    Vector r(1);
    bool clamped = false;
    r << 1.2;
    EXPECT_DOUBLE_EQ(quantize(r, s, &clamped)(0), 1.5);
    EXPECT_FALSE(clamped);
    r << 4.0;
    EXPECT_DOUBLE_EQ(quantize(r, s, &clamped)(0), 3.5);
    EXPECT_FALSE(clamped);
    r << -2.0;
    EXPECT_DOUBLE_EQ(quantize(r, s, &clamped)(0), 0.5);
    EXPECT_TRUE(clamped);
}

TEST(Quantize, RejectsInvalidQuantizer) {
    QuantizerSpec s;
    s.bins_per_dim = {0};
    s.ranges = {{0.0, 1.0}};
    EXPECT_THROW(s.validate(), InvalidArgument);
    s.bins_per_dim = {2};
    s.ranges = {{1.0, 1.0}};
    EXPECT_THROW(s.validate(), InvalidArgument);
}

class SpiralCoding : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        const SpcaModel& m = spiral_model();
        Dataset test = gen_noisy_spiral(60, 41);
        BatchTransform bt = transform_batch(m, test.points);
        std::vector<Eigen::Index> keep;
        for (Eigen::Index i = 0; i < test.size(); ++i) {
            if (bt.errors[static_cast<std::size_t>(i)].empty() && bt.responses[static_cast<std::size_t>(i)].converged) {
                keep.push_back(i);
            }
        }
        r_ = Matrix(static_cast<Eigen::Index>(keep.size()), 2);
        x_ = Matrix(static_cast<Eigen::Index>(keep.size()), 2);
        for (std::size_t i = 0; i < keep.size(); ++i) {
            r_.row(static_cast<Eigen::Index>(i)) = bt.r.row(keep[i]);
            x_.row(static_cast<Eigen::Index>(i)) = test.points.row(keep[i]);
        }
    }
    static Matrix r_;
    static Matrix x_;
};

Matrix SpiralCoding::r_;
Matrix SpiralCoding::x_;

TEST_F(SpiralCoding, FineQuantizationIsLossless) {
    const SpcaModel& m = spiral_model();
    QuantizeResult q = quantize_roundtrip(r_, x_, make_quantizer(r_, {20, 20}), m);
    EXPECT_EQ(q.failures, 0);
    EXPECT_LE(q.rmse, TransformOptions{}.tol_frac * m.diameter);
}

TEST_F(SpiralCoding, SingleBinGivesMidpointReconstruction) {
    const SpcaModel& m = spiral_model();
    QuantizerSpec s = make_quantizer(r_, {0, 0});
    QuantizeResult q = quantize_roundtrip(r_, x_, s, m);
    Vector mid(2);
    mid << 0.5 * (s.ranges[0].first + s.ranges[0].second), 0.5 * (s.ranges[1].first + s.ranges[1].second);
    const Vector expected = inverse_clamped(m, mid);
    for (Eigen::Index i = 0; i < q.x_hat.rows(); ++i) {
        if (q.ok[static_cast<std::size_t>(i)]) {
            EXPECT_TRUE(q.x_hat.row(i).transpose().isApprox(expected, 1e-12));
        }
    }
}

TEST_F(SpiralCoding, RmseNonIncreasingWithResolution) {
    const SpcaModel& m = spiral_model();
    double previous = std::numeric_limits<double>::infinity();
    for (int bits = 1; bits <= 7; ++bits) {
        QuantizeResult q = quantize_roundtrip(r_, x_, make_quantizer(r_, {bits, bits}), m);
        EXPECT_LE(q.rmse, previous * (1.0 + 1e-12)) << bits << " bits";
        previous = q.rmse;
    }
}

TEST(ConditionalHist, IndependentRowsMatchMarginal) {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> g;
    Matrix m(50000, 2);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
    const int bins = 24;
    Histogram2D h = conditional_hist(m, bins);
    Vector pooled = h.counts.colwise().sum().transpose();
    pooled /= pooled.sum();
    for (int a = 0; a < bins; ++a) {
        if (h.empty_row[static_cast<std::size_t>(a)]) continue;
        // Rows with very few samples are dominated by sampling noise.
        if (h.counts.row(a).sum() < 200) continue;
        const double tv = 0.5 * (h.bins.row(a).transpose() - pooled).cwiseAbs().sum();
        EXPECT_LE(tv, 0.15) << "row " << a;
    }
}

TEST(ConditionalHist, BowTieWidensWithConditioningValue) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::normal_distribution<double> g;
    Matrix m(50000, 2);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        m(i, 0) = u(rng);
        m(i, 1) = std::abs(m(i, 0)) * g(rng);
    }
    const int bins = 16;
    Histogram2D h = conditional_hist(m, bins);
    std::vector<double> centre(static_cast<std::size_t>(bins));
    std::vector<double> spread(static_cast<std::size_t>(bins));
    for (int a = 0; a < bins; ++a) {
        centre[static_cast<std::size_t>(a)] = 0.5 * (h.edges_a[static_cast<std::size_t>(a)] + h.edges_a[static_cast<std::size_t>(a) + 1]);
        double mu = 0.0;
        double m2 = 0.0;
        for (int b = 0; b < bins; ++b) {
            const double y = 0.5 * (h.edges_b[static_cast<std::size_t>(b)] + h.edges_b[static_cast<std::size_t>(b) + 1]);
            mu += h.bins(a, b) * y;
            m2 += h.bins(a, b) * y * y;
        }
        spread[static_cast<std::size_t>(a)] = std::sqrt(m2 - mu * mu);
    }
    // Walking outward from the middle on each side, the row spread grows.
    for (int a = bins / 2; a + 1 < bins; ++a) EXPECT_GT(spread[static_cast<std::size_t>(a) + 1], spread[static_cast<std::size_t>(a)]);
    for (int a = bins / 2 - 1; a > 0; --a) EXPECT_GT(spread[static_cast<std::size_t>(a) - 1], spread[static_cast<std::size_t>(a)]);
}

TEST(ConditionalHist, SingleRowSumsToOne) {
    Matrix m(100, 2);
    for (Eigen::Index i = 0; i < 100; ++i) {
        m(i, 0) = 1.0;
        m(i, 1) = static_cast<double>(i);
    }
    Histogram2D h = conditional_hist(m, 8);
    int populated = 0;
    for (Eigen::Index a = 0; a < h.bins.rows(); ++a) {
        if (h.empty_row[static_cast<std::size_t>(a)]) continue;
        ++populated;
        EXPECT_NEAR(h.bins.row(a).sum(), 1.0, 1e-12);
    }
    EXPECT_EQ(populated, 1);
    const std::string csv = format_histogram_csv(h);
    EXPECT_FALSE(csv.empty());
}

TEST(MajorityLabel, TiesGoToSmallestLabel) {
    EXPECT_EQ(majority_label({3, 1, 3, 1}), 1);
    EXPECT_EQ(majority_label({2, 2, 5}), 2);
    EXPECT_EQ(majority_label({7}), 7);
}

TEST(Classify, TrainingPointKeepsItsLabel) {
    const SpcaModel& m = spiral_model();
    const Dataset& base = *m.training;
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < base.size(); i += 20) rows.push_back(i);
    Dataset train = subset(base, rows);
    std::vector<int> labels;
    for (std::size_t i = 0; i < rows.size(); ++i) labels.push_back(static_cast<int>(i % 3));
    train.labels = labels;
    SpcaKnnClassifier clf(m, train);
    for (std::size_t i = 0; i < rows.size(); i += 10) {
        EXPECT_EQ(clf.classify(train.point(static_cast<Eigen::Index>(i)), 1), labels[i]);
    }
}

TEST(Classify, LinearDataAgreesWithMahalanobis) {
    Vector s(2);
    s << 2.0, 0.7;
    Matrix rot(2, 2);
    rot << std::cos(0.5), -std::sin(0.5), std::sin(0.5), std::cos(0.5);
    Dataset raw = gen_gaussian(600, s, rot, 3);
    std::vector<int> labels;
    for (Eigen::Index i = 0; i < raw.size(); ++i) {
        const Vector z = rot.transpose() * raw.point(i);
        labels.push_back(z(0) / s(0) + z(1) / s(1) > 0 ? 1 : 0);
    }
    Dataset train(raw.points, labels);
    SpcaConfig cfg;
    cfg.metric.gamma = 0.0;
    cfg.pc.k_frac = 0.3;
    cfg.pc.q = kInf;
    SpcaModel m = fit(train, cfg);
    SpcaKnnClassifier clf(m, train);
    MahalanobisKnn maha(train);
    Dataset test = gen_gaussian(60, s, rot, 4);
    int agree = 0;
    for (Eigen::Index i = 0; i < test.size(); ++i) {
        try {
            agree += clf.classify(test.point(i), 5) == maha.classify(test.point(i), 5);
        } catch (const ClassificationFailure&) {
        }
    }
    EXPECT_GE(agree, 0.95 * static_cast<double>(test.size()));
}

TEST(Classify, BentTwoClusterAccuracy) {
    Dataset train = gen_two_cluster(10, 20, 30, {0.83, 1.5}, 400, 3);
    Dataset test = gen_two_cluster(10, 20, 30, {0.83, 1.5}, 100, 4);
    SpcaModel m = fit(Dataset(train.points), SpcaConfig{});
    SpcaKnnClassifier clf(m, train);
    int ok = 0;
    for (Eigen::Index i = 0; i < test.size(); ++i) {
        try {
            ok += clf.classify(test.point(i), 5) == (*test.labels)[static_cast<std::size_t>(i)];
        } catch (const ClassificationFailure&) {
        }
    }
    EXPECT_GE(ok, 90);
}

TEST(DomainAdapt, IdentityAdaptation) {
    const SpcaModel& m = spiral_model();
    Dataset test = gen_noisy_spiral(10, 47);
    for (Eigen::Index i = 0; i < test.size(); ++i) {
        AdaptResult a = domain_adapt(m, m, test.point(i));
        if (!a.converged) continue;
        EXPECT_LE((a.x_hat - test.point(i)).norm(), TransformOptions{}.tol_frac * m.diameter);
    }
}

TEST(DomainAdapt, RotatedCopyMapsBack) {
    Dataset a = gen_noisy_spiral(2000, 1);
    Matrix q(2, 2);
    q << std::cos(1.1), -std::sin(1.1), std::sin(1.1), std::cos(1.1);
    Dataset b(a.points * q.transpose());
    SpcaModel ma = fit(a, spiral_config(0.0));
    SpcaModel mb = fit(b, spiral_config(0.0));
    Dataset test_a = gen_noisy_spiral(30, 53);
    std::vector<double> err;
    for (Eigen::Index i = 0; i < test_a.size(); ++i) {
        const Vector xb = q * test_a.point(i);
        try {
            AdaptResult r = domain_adapt(ma, mb, xb, {}, true);
            err.push_back((r.x_hat - q.transpose() * xb).norm());
        } catch (const Error&) {
        }
    }
    ASSERT_GE(err.size(), 25u);
    EXPECT_LE(median(err), 0.05 * ma.diameter);
}

TEST(TransformBatch, RecordsPerRowFailures) {
    const SpcaModel& m = spiral_model();
    PointMatrix x(3, 2);
    x.row(0) = m.origin.transpose();
    x.row(1) << 1e4, 1e4;
    x.row(2) = m.origin.transpose();
    BatchTransform bt = transform_batch(m, x);
    EXPECT_EQ(bt.failures(), 1);
    EXPECT_TRUE(bt.errors[0].empty());
    EXPECT_FALSE(bt.errors[1].empty());
    EXPECT_TRUE(std::isnan(bt.r(1, 0)));
    EXPECT_EQ(bt.r.row(2), Eigen::RowVector2d::Zero());
}

TEST(Stats, AgainstClosedForms) {
    EXPECT_DOUBLE_EQ(mean({1.0, 2.0, 6.0}), 3.0);
    EXPECT_DOUBLE_EQ(variance({1.0, 2.0, 6.0}), 7.0);
    EXPECT_DOUBLE_EQ(median({5.0, 1.0, 3.0, 2.0}), 2.5);
    EXPECT_NEAR(ols_slope({0, 1, 2, 3}, {1, 3, 5, 7}), 2.0, 1e-15);
    std::vector<double> grid;
    for (int i = 0; i <= 1000; ++i) grid.push_back(i / 1000.0);
    EXPECT_LE(ks_uniform(grid), 1.0 / 1000.0 + 1e-12);
    EXPECT_NEAR(histogram_entropy(grid, 10), 0.0, 0.01);
    EXPECT_EQ(histogram_entropy({1.0, 1.0}, 4), -kInf);
}
