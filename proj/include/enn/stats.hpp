#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace enn {

inline double normal_cdf(double x, double mean = 0.0, double variance = 1.0) {
    if (!(variance > 0.0)) throw std::invalid_argument("normal_cdf: variance must be > 0");
    return 0.5 * std::erfc(-(x - mean) / std::sqrt(2.0 * variance));
}

/// Sup distance between the empirical CDF of the samples and a reference
/// CDF, via the order-statistic formula
/// max_i max(|i/n - F(x_(i))|, |F(x_(i)) - (i-1)/n|).
template <typename Cdf>
double ks_statistic(std::span<const double> samples, Cdf&& reference) {
    if (samples.empty()) throw std::invalid_argument("ks_statistic: empty samples");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double sup = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = reference(sorted[i]);
        const double hi = std::fabs(static_cast<double>(i + 1) / n - f);
        const double lo = std::fabs(f - static_cast<double>(i) / n);
        sup = std::max(sup, std::max(hi, lo));
    }
    return sup;
}

/// Asymptotic 1% critical value for the one-sample KS statistic.
inline double ks_critical_1pct(std::size_t n) {
    return 1.63 / std::sqrt(static_cast<double>(n));
}

inline double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median: empty input");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double mean(std::span<const double> v) {
    if (v.empty()) throw std::invalid_argument("mean: empty input");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double sample_variance(std::span<const double> v) {
    if (v.size() < 2) throw std::invalid_argument("sample_variance: need at least 2 values");
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

/// Least-squares slope of y against x.
inline double regression_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("regression_slope: need matching inputs of size >= 2");
    const double mx = mean(x), my = mean(y);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0) throw std::invalid_argument("regression_slope: degenerate abscissae");
    return sxy / sxx;
}

}  // namespace enn
