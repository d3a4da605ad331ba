#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "enn/matrix.hpp"

namespace enn {

/// Expectile level, constrained to the open interval (0, 1).
class Tau {
public:
    explicit Tau(double v) : value_(v) {
        if (!(v > 0.0 && v < 1.0))
            throw std::invalid_argument("tau must lie in (0, 1), got " + std::to_string(v));
    }
    double value() const { return value_; }

private:
    double value_;
};

/// The constraint class of one-hidden-layer sigmoid networks: width r,
/// an L1 budget V on (output bias, output weights) and an L1 budget M on
/// each hidden unit's (bias, weight) row. Both budgets include the bias.
struct SieveSpec {
    int width;             // r
    double output_budget;  // V
    double hidden_budget;  // M
    int input_dim;         // d

    SieveSpec(int r, double v, double m, int d)
        : width(r), output_budget(v), hidden_budget(m), input_dim(d) {
        if (r < 1) throw std::invalid_argument("sieve width must be >= 1");
        if (d < 1) throw std::invalid_argument("input dimension must be >= 1");
        if (!(v >= 4.0)) throw std::invalid_argument("output budget V must be >= 4");
        if (!(m > 0.0)) throw std::invalid_argument("hidden budget M must be > 0");
    }
};

/// All trainable parameters of a one-hidden-layer network with affine output.
/// hidden_weights is width x input_dim; row j belongs to hidden unit j.
struct EnnParams {
    double output_bias = 0.0;
    std::vector<double> output_weights;
    Matrix hidden_weights;
    std::vector<double> hidden_biases;

    EnnParams() = default;
    EnnParams(int width, int input_dim)
        : output_weights(width, 0.0),
          hidden_weights(static_cast<std::size_t>(width), static_cast<std::size_t>(input_dim)),
          hidden_biases(width, 0.0) {}

    std::size_t width() const { return output_weights.size(); }
    std::size_t input_dim() const { return hidden_weights.cols; }

    bool consistent() const {
        return hidden_weights.rows == output_weights.size() &&
               hidden_biases.size() == output_weights.size();
    }

    bool finite() const {
        return std::isfinite(output_bias) && all_finite(output_weights) &&
               all_finite(hidden_weights) && all_finite(hidden_biases);
    }
};

inline void check_params(const EnnParams& p) {
    if (!p.consistent())
        throw std::invalid_argument("EnnParams dimensions are inconsistent");
    if (!p.finite())
        throw std::invalid_argument("EnnParams contain non-finite entries");
}

/// Design matrix (n x d) plus response vector (length n).
struct Dataset {
    Matrix x;
    std::vector<double> y;

    std::size_t size() const { return y.size(); }
    std::size_t input_dim() const { return x.cols; }
};

inline void check_dataset(const Dataset& data) {
    if (data.x.rows != data.y.size())
        throw std::invalid_argument("dataset row count does not match response length");
    if (!all_finite(data.x) || !all_finite(data.y))
        throw std::invalid_argument("dataset contains non-finite entries");
}

}  // namespace enn
