#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>

#include "enn/network.hpp"
#include "enn/rng.hpp"
#include "enn/types.hpp"

namespace enn {

/// Catalog of true regression functions on [0,1]^d. `linear` and `sine`
/// act on the coordinate sum, so d = 1 gives the familiar a + b x and
/// amplitude * sin(2 pi freq x).
struct TargetSpec {
    enum class Kind { Constant, Linear, Sine, FeasibleEnn };

    Kind kind = Kind::Constant;
    double c = 0.0;          // constant
    double a = 0.0;          // linear intercept
    double b = 0.0;          // linear slope
    double amplitude = 0.0;  // sine
    double frequency = 0.0;  // sine
    EnnParams params;        // feasible-enn

    static TargetSpec constant(double value) {
        TargetSpec t;
        t.kind = Kind::Constant;
        t.c = value;
        return t;
    }
    static TargetSpec linear(double intercept, double slope) {
        TargetSpec t;
        t.kind = Kind::Linear;
        t.a = intercept;
        t.b = slope;
        return t;
    }
    static TargetSpec sine(double amplitude, double frequency) {
        TargetSpec t;
        t.kind = Kind::Sine;
        t.amplitude = amplitude;
        t.frequency = frequency;
        return t;
    }
    static TargetSpec feasible_enn(EnnParams params) {
        check_params(params);
        TargetSpec t;
        t.kind = Kind::FeasibleEnn;
        t.params = std::move(params);
        return t;
    }

    double operator()(std::span<const double> x) const {
        switch (kind) {
            case Kind::Constant:
                return c;
            case Kind::Linear: {
                double s = 0.0;
                for (double v : x) s += v;
                return a + b * s;
            }
            case Kind::Sine: {
                double s = 0.0;
                for (double v : x) s += v;
                return amplitude * std::sin(2.0 * std::numbers::pi * frequency * s);
            }
            case Kind::FeasibleEnn:
                return forward(params, x);
        }
        throw std::logic_error("TargetSpec: unknown kind");
    }

    std::string name() const {
        switch (kind) {
            case Kind::Constant: return "constant";
            case Kind::Linear: return "linear";
            case Kind::Sine: return "sine";
            case Kind::FeasibleEnn: return "feasible_enn";
        }
        return "?";
    }
};

/// Mean-zero noise with finite variance sigma2. The uniform variant draws
/// from [-a, a] with a = sqrt(3 sigma2).
struct NoiseSpec {
    enum class Kind { None, Gaussian, Uniform };

    Kind kind = Kind::None;
    double sigma2 = 0.0;

    static NoiseSpec none() { return {}; }
    static NoiseSpec gaussian(double sigma2) {
        if (!(sigma2 >= 0.0)) throw std::invalid_argument("NoiseSpec: sigma2 must be >= 0");
        return {Kind::Gaussian, sigma2};
    }
    static NoiseSpec uniform(double sigma2) {
        if (!(sigma2 >= 0.0)) throw std::invalid_argument("NoiseSpec: sigma2 must be >= 0");
        return {Kind::Uniform, sigma2};
    }

    double draw(Rng& rng) const {
        switch (kind) {
            case Kind::None:
                return 0.0;
            case Kind::Gaussian:
                return std::sqrt(sigma2) * rng.gaussian();
            case Kind::Uniform: {
                const double half_width = std::sqrt(3.0 * sigma2);
                return rng.uniform(-half_width, half_width);
            }
        }
        throw std::logic_error("NoiseSpec: unknown kind");
    }

    std::string name() const {
        switch (kind) {
            case Kind::None: return "none";
            case Kind::Gaussian: return "gaussian";
            case Kind::Uniform: return "uniform";
        }
        return "?";
    }
};

/// Draws a dataset from the model y = f0(x) + eps with x uniform on
/// [0,1]^d. Per point, the d covariates are drawn before the noise, so
/// the stream layout is part of the contract.
inline Dataset generate_dataset(const TargetSpec& target, const NoiseSpec& noise, long n, int d,
                                std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("generate_dataset: n must be >= 1");
    if (d < 1) throw std::invalid_argument("generate_dataset: d must be >= 1");
    Rng rng(seed);
    Dataset data;
    data.x = Matrix(static_cast<std::size_t>(n), static_cast<std::size_t>(d));
    data.y.resize(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < data.x.rows; ++i) {
        auto row = data.x.row(i);
        for (double& v : row) v = rng.uniform();
        data.y[i] = target(row) + noise.draw(rng);
    }
    return data;
}

}  // namespace enn
