#pragma once

#include <cmath>
#include <span>
#include <stdexcept>

#include "enn/types.hpp"

namespace enn {

/// Logistic sigmoid, computed on the stable branch for either sign.
inline double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

/// Network output: output_bias + sum_j output_weights[j] * sigmoid(w_j . x + b_j).
/// Hidden activation is the logistic sigmoid, output activation the identity.
inline double forward(const EnnParams& params, std::span<const double> x) {
    if (!params.consistent() || x.size() != params.input_dim())
        throw std::invalid_argument("forward: dimension mismatch between params and input");
    double out = params.output_bias;
    for (std::size_t j = 0; j < params.width(); ++j) {
        const double z = dot(params.hidden_weights.row(j), x) + params.hidden_biases[j];
        out += params.output_weights[j] * sigmoid(z);
    }
    return out;
}

/// Asymmetric squared loss: tau * (y - f)^2 when y >= f, (1 - tau) * (y - f)^2
/// when y < f. The tie y = f takes the y >= f branch; both give 0.
inline double expectile_loss(Tau tau, double y, double f) {
    const double r = y - f;
    const double w = (y >= f) ? tau.value() : (1.0 - tau.value());
    return w * r * r;
}

/// Derivative of expectile_loss in its fitted value f. Continuous at y = f,
/// where both one-sided derivatives vanish.
inline double expectile_loss_df(Tau tau, double y, double f) {
    const double w = (y >= f) ? tau.value() : (1.0 - tau.value());
    return -2.0 * w * (y - f);
}

/// Mean asymmetric loss over the dataset.
inline double empirical_risk(Tau tau, const EnnParams& params, const Dataset& data) {
    if (data.size() == 0) throw std::invalid_argument("empirical_risk: empty dataset");
    if (data.input_dim() != params.input_dim())
        throw std::invalid_argument("empirical_risk: dimension mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i)
        sum += expectile_loss(tau, data.y[i], forward(params, data.x.row(i)));
    return sum / static_cast<double>(data.size());
}

/// Empirical risk split into the two one-sided squared-residual means:
/// risk = tau * positive_part + (1 - tau) * negative_part, where
/// positive_part averages (y - f)^2 over residuals y - f >= 0 and
/// negative_part over residuals y - f < 0 (each summed over all n points).
struct RiskSplit {
    double positive_part = 0.0;
    double negative_part = 0.0;

    double combine(Tau tau) const {
        return tau.value() * positive_part + (1.0 - tau.value()) * negative_part;
    }
};

inline RiskSplit empirical_risk_split(const EnnParams& params, const Dataset& data) {
    if (data.size() == 0) throw std::invalid_argument("empirical_risk_split: empty dataset");
    RiskSplit split;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double f = forward(params, data.x.row(i));
        const double r = data.y[i] - f;
        if (r >= 0.0)
            split.positive_part += r * r;
        else
            split.negative_part += r * r;
    }
    split.positive_part /= static_cast<double>(data.size());
    split.negative_part /= static_cast<double>(data.size());
    return split;
}

/// Exact gradient of empirical_risk in every parameter, via the chain rule
/// and sigmoid'(z) = s(1 - s). Returned in an EnnParams of the same shape.
inline EnnParams empirical_risk_grad(Tau tau, const EnnParams& params, const Dataset& data) {
    if (data.size() == 0) throw std::invalid_argument("empirical_risk_grad: empty dataset");
    if (data.input_dim() != params.input_dim())
        throw std::invalid_argument("empirical_risk_grad: dimension mismatch");

    const std::size_t r = params.width();
    const std::size_t n = data.size();
    EnnParams grad(static_cast<int>(r), static_cast<int>(params.input_dim()));
    std::vector<double> hidden(r);

    for (std::size_t i = 0; i < n; ++i) {
        const auto x = data.x.row(i);
        double f = params.output_bias;
        for (std::size_t j = 0; j < r; ++j) {
            hidden[j] = sigmoid(dot(params.hidden_weights.row(j), x) + params.hidden_biases[j]);
            f += params.output_weights[j] * hidden[j];
        }
        const double dl = expectile_loss_df(tau, data.y[i], f);
        grad.output_bias += dl;
        for (std::size_t j = 0; j < r; ++j) {
            const double s = hidden[j];
            grad.output_weights[j] += dl * s;
            const double dz = dl * params.output_weights[j] * s * (1.0 - s);
            grad.hidden_biases[j] += dz;
            auto grow = grad.hidden_weights.row(j);
            for (std::size_t k = 0; k < x.size(); ++k) grow[k] += dz * x[k];
        }
    }

    const double inv_n = 1.0 / static_cast<double>(n);
    grad.output_bias *= inv_n;
    for (double& g : grad.output_weights) g *= inv_n;
    for (double& g : grad.hidden_biases) g *= inv_n;
    for (double& g : grad.hidden_weights.data) g *= inv_n;
    return grad;
}

}  // namespace enn
