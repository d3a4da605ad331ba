#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>

#include "enn/matrix.hpp"
#include "enn/quadrature.hpp"
#include "enn/rng.hpp"

namespace enn {

/// Expectation of a function of the covariate under the uniform law on
/// [0,1]^d, estimated either by Romberg quadrature (d = 1, smooth
/// integrands) or by a fixed-seed Monte Carlo sample shared by every
/// functional evaluated against the same oracle.
class FunctionalOracle {
public:
    static FunctionalOracle romberg(int levels = 11) {
        FunctionalOracle o;
        o.use_romberg_ = true;
        o.levels_ = levels;
        return o;
    }

    static FunctionalOracle monte_carlo(int d, long points, std::uint64_t seed) {
        if (d < 1) throw std::invalid_argument("FunctionalOracle: d must be >= 1");
        if (points < 1) throw std::invalid_argument("FunctionalOracle: points must be >= 1");
        FunctionalOracle o;
        o.use_romberg_ = false;
        o.xs_ = Matrix(static_cast<std::size_t>(points), static_cast<std::size_t>(d));
        Rng rng(seed);
        for (double& v : o.xs_.data) v = rng.uniform();
        return o;
    }

    template <typename F>
    double expectation(F&& f) const {
        if (use_romberg_) {
            return enn::romberg(
                [&](double x) { return f(std::span<const double>(&x, 1)); }, 0.0, 1.0, levels_);
        }
        double s = 0.0;
        for (std::size_t i = 0; i < xs_.rows; ++i) s += f(xs_.row(i));
        return s / static_cast<double>(xs_.rows);
    }

    long points() const {
        return use_romberg_ ? (1L << levels_) + 1 : static_cast<long>(xs_.rows);
    }

private:
    FunctionalOracle() = default;
    bool use_romberg_ = true;
    int levels_ = 11;
    Matrix xs_;
};

}  // namespace enn
