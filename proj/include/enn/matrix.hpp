#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace enn {

/// Dense row-major matrix of doubles. Rows are handed out as spans so
/// callers can iterate design points without copying.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
    std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }

    bool operator==(const Matrix&) const = default;
};

inline bool all_finite(std::span<const double> v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

inline bool all_finite(const Matrix& m) { return all_finite(std::span<const double>(m.data)); }

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double l1_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += std::fabs(x);
    return s;
}

inline double l2_norm_sq(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

}  // namespace enn
