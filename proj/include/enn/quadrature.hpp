#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace enn {

/// Romberg integration of f over [a, b]: Richardson-extrapolated trapezoid
/// rule on 2^levels + 1 points. levels = 11 gives the 2049-point rule the
/// experiments use for one-dimensional population functionals.
template <typename F>
double romberg(F&& f, double a, double b, int levels = 11) {
    if (levels < 1 || levels > 24) throw std::invalid_argument("romberg: levels out of range");
    std::vector<double> prev(levels + 1), curr(levels + 1);

    double h = b - a;
    prev[0] = 0.5 * h * (f(a) + f(b));
    for (int k = 1; k <= levels; ++k) {
        h *= 0.5;
        double sum = 0.0;
        const long points = 1L << (k - 1);
        for (long i = 0; i < points; ++i) sum += f(a + (2.0 * i + 1.0) * h);
        curr[0] = 0.5 * prev[0] + h * sum;
        double factor = 1.0;
        for (int j = 1; j <= k; ++j) {
            factor *= 4.0;
            curr[j] = curr[j - 1] + (curr[j - 1] - prev[j - 1]) / (factor - 1.0);
        }
        std::swap(prev, curr);
    }
    return prev[levels];
}

}  // namespace enn
