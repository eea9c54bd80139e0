#include "spca/stats.hpp"

#include "spca/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace spca {

double histogram_entropy(const std::vector<double>& values, int bins) {
    if (values.empty()) throw InvalidArgument("histogram_entropy: no values");
    if (bins < 1) throw InvalidArgument("histogram_entropy: bins must be >= 1");
    auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    if (!(hi > lo)) return -std::numeric_limits<double>::infinity();
    const double width = (hi - lo) / bins;
    std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
    for (double v : values) {
        int b = std::min(bins - 1, static_cast<int>((v - lo) / width));
        counts[static_cast<std::size_t>(b)] += 1.0;
    }
    const double n = static_cast<double>(values.size());
    double h = 0.0;
    for (double c : counts) {
        if (c > 0.0) h -= (c / n) * std::log2(c / n);
    }
    return h + std::log2(width);
}

double ks_uniform(std::vector<double> values) {
    if (values.empty()) throw InvalidArgument("ks_uniform: no values");
    std::sort(values.begin(), values.end());
    const double lo = values.front();
    const double hi = values.back();
    if (!(hi > lo)) return 1.0;
    const double n = static_cast<double>(values.size());
    double stat = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        double f = (values[i] - lo) / (hi - lo);
        stat = std::max({stat, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    return stat;
}

double mean(const std::vector<double>& values) {
    if (values.empty()) throw InvalidArgument("mean: no values");
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
}

double variance(const std::vector<double>& values) {
    if (values.size() < 2) throw InvalidArgument("variance: need at least 2 values");
    const double m = mean(values);
    double s = 0.0;
    for (double v : values) s += (v - m) * (v - m);
    return s / static_cast<double>(values.size() - 1);
}

double excess_kurtosis(const std::vector<double>& values) {
    const double m = mean(values);
    double m2 = 0.0;
    double m4 = 0.0;
    for (double v : values) {
        double c = (v - m) * (v - m);
        m2 += c;
        m4 += c * c;
    }
    const double n = static_cast<double>(values.size());
    m2 /= n;
    m4 /= n;
    if (!(m2 > 0.0)) throw InvalidArgument("excess_kurtosis: zero variance");
    return m4 / (m2 * m2) - 3.0;
}

double median(std::vector<double> values) {
    if (values.empty()) throw InvalidArgument("median: no values");
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    double hi = values[mid];
    if (values.size() % 2 == 1) return hi;
    double lo = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("ols_slope: need >= 2 paired values");
    const double mx = mean(x);
    const double my = mean(y);
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (!(sxx > 0.0)) throw InvalidArgument("ols_slope: constant regressor");
    return sxy / sxx;
}

}  // namespace spca
