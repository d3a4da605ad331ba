#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "enn/network.hpp"
#include "enn/rng.hpp"
#include "enn/sieve.hpp"
#include "enn/types.hpp"

namespace enn {

/// A descent produced a non-finite risk or gradient.
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TrainConfig {
    double step_size = 0.5;
    int max_iters = 1000;
    double grad_tol = 1e-6;
    int restarts = 3;
    std::uint64_t seed = 1;

    void check() const {
        if (!(step_size > 0.0)) throw std::invalid_argument("TrainConfig: step_size must be > 0");
        if (max_iters < 1) throw std::invalid_argument("TrainConfig: max_iters must be >= 1");
        if (!(grad_tol > 0.0)) throw std::invalid_argument("TrainConfig: grad_tol must be > 0");
        if (restarts < 1) throw std::invalid_argument("TrainConfig: restarts must be >= 1");
    }
};

struct FittedModel {
    EnnParams params;
    double risk = 0.0;
    int iterations = 0;
    bool converged = false;
    int restart_index = 0;
};

namespace detail {

inline void axpy_params(EnnParams& out, double a, const EnnParams& g) {
    out.output_bias += a * g.output_bias;
    for (std::size_t j = 0; j < out.output_weights.size(); ++j)
        out.output_weights[j] += a * g.output_weights[j];
    for (std::size_t j = 0; j < out.hidden_biases.size(); ++j)
        out.hidden_biases[j] += a * g.hidden_biases[j];
    for (std::size_t k = 0; k < out.hidden_weights.data.size(); ++k)
        out.hidden_weights.data[k] += a * g.hidden_weights.data[k];
}

inline double params_dist_sq(const EnnParams& a, const EnnParams& b) {
    double s = (a.output_bias - b.output_bias) * (a.output_bias - b.output_bias);
    for (std::size_t j = 0; j < a.output_weights.size(); ++j) {
        const double d = a.output_weights[j] - b.output_weights[j];
        s += d * d;
    }
    for (std::size_t j = 0; j < a.hidden_biases.size(); ++j) {
        const double d = a.hidden_biases[j] - b.hidden_biases[j];
        s += d * d;
    }
    for (std::size_t k = 0; k < a.hidden_weights.data.size(); ++k) {
        const double d = a.hidden_weights.data[k] - b.hidden_weights.data[k];
        s += d * d;
    }
    return s;
}

/// One projected-gradient descent from a feasible start. Every accepted
/// iterate is feasible and the risk along accepted iterates never increases:
/// the step is halved until the projected candidate stops increasing it.
inline FittedModel descend(const Dataset& data, Tau tau, const SieveSpec& sieve,
                           const TrainConfig& cfg, EnnParams start, int restart_index) {
    constexpr int kMaxHalvings = 60;

    EnnParams current = std::move(start);
    double risk = empirical_risk(tau, current, data);
    if (!std::isfinite(risk))
        throw NumericalFailure("non-finite risk at restart " + std::to_string(restart_index));

    FittedModel model;
    model.restart_index = restart_index;

    int it = 0;
    for (; it < cfg.max_iters; ++it) {
        const EnnParams grad = empirical_risk_grad(tau, current, data);
        if (!grad.finite())
            throw NumericalFailure("non-finite gradient at restart " +
                                   std::to_string(restart_index));

        // Candidate at the base step also yields the stationarity measure:
        // ||theta - P(theta - s0 grad)|| / s0.
        EnnParams candidate = current;
        axpy_params(candidate, -cfg.step_size, grad);
        candidate = project_sieve(std::move(candidate), sieve);
        const double pg_norm = std::sqrt(params_dist_sq(current, candidate)) / cfg.step_size;
        if (pg_norm < cfg.grad_tol) {
            model.converged = true;
            break;
        }

        double step = cfg.step_size;
        double cand_risk = empirical_risk(tau, candidate, data);
        int halvings = 0;
        while (cand_risk > risk && halvings < kMaxHalvings) {
            step *= 0.5;
            candidate = current;
            axpy_params(candidate, -step, grad);
            candidate = project_sieve(std::move(candidate), sieve);
            cand_risk = empirical_risk(tau, candidate, data);
            ++halvings;
        }
        if (!std::isfinite(cand_risk))
            throw NumericalFailure("non-finite risk at restart " + std::to_string(restart_index));
        if (cand_risk > risk) break;  // no descent direction left at this resolution

        current = std::move(candidate);
        risk = cand_risk;
    }

    model.params = std::move(current);
    model.risk = empirical_risk(tau, model.params, data);
    model.iterations = it;
    return model;
}

}  // namespace detail

/// Sieve-constrained empirical risk minimization: `restarts` independent
/// projected-gradient descents from sampled feasible starts, returning the
/// one with the lowest final risk (ties go to the lowest restart index).
/// Restart seeds derive from cfg.seed, so execution order cannot change
/// the result.
inline FittedModel fit(const Dataset& data, Tau tau, const SieveSpec& sieve,
                       const TrainConfig& cfg) {
    check_dataset(data);
    cfg.check();
    if (data.size() == 0) throw std::invalid_argument("fit: empty dataset");
    if (data.input_dim() != static_cast<std::size_t>(sieve.input_dim))
        throw std::invalid_argument("fit: dataset dimension does not match sieve");

    FittedModel best;
    bool have_best = false;
    for (int k = 0; k < cfg.restarts; ++k) {
        EnnParams start = sample_sieve(sieve, derive_seed(cfg.seed, {static_cast<std::uint64_t>(k)}));
        FittedModel model = detail::descend(data, tau, sieve, cfg, std::move(start), k);
        if (!have_best || model.risk < best.risk) {
            best = std::move(model);
            have_best = true;
        }
    }
    return best;
}

/// The constant minimizer of the asymmetric squared risk (the sample
/// tau-expectile), by the weighted-mean fixed point
/// m <- sum w_i y_i / sum w_i with w_i = tau if y_i >= m else 1 - tau.
inline double fit_constant(std::span<const double> y, Tau tau) {
    if (y.empty()) throw std::invalid_argument("fit_constant: empty input");
    constexpr double kTol = 1e-12;
    constexpr int kMaxIters = 1000;

    double m = 0.0;
    for (double v : y) m += v;
    m /= static_cast<double>(y.size());

    for (int it = 0; it < kMaxIters; ++it) {
        double num = 0.0, den = 0.0;
        for (double v : y) {
            const double w = (v >= m) ? tau.value() : (1.0 - tau.value());
            num += w * v;
            den += w;
        }
        const double next = num / den;
        const double diff = std::fabs(next - m);
        m = next;
        if (diff <= kTol) break;
    }
    return m;
}

/// Independent expectile solver: bisection on the first-order condition
/// sum_i |tau - 1{y_i < m}| (y_i - m) = 0 over [min y, max y]. Used to
/// cross-check fit_constant; the two must agree to 1e-10.
inline double expectile_by_bisection(std::span<const double> y, Tau tau) {
    if (y.empty()) throw std::invalid_argument("expectile_by_bisection: empty input");
    const auto [lo_it, hi_it] = std::minmax_element(y.begin(), y.end());
    double lo = *lo_it, hi = *hi_it;
    if (lo == hi) return lo;

    const auto balance = [&](double m) {
        double s = 0.0;
        for (double v : y) {
            const double w = (v < m) ? (1.0 - tau.value()) : tau.value();
            s += w * (v - m);
        }
        return s;
    };

    // balance is continuous and strictly decreasing; positive at lo, negative at hi.
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (balance(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// Root-mean-square difference between a fitted network and a reference
/// function over the design points.
template <typename F>
double empirical_norm(const EnnParams& params, F&& reference, const Matrix& x) {
    if (x.rows == 0) throw std::invalid_argument("empirical_norm: empty design");
    double s = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double d = forward(params, x.row(i)) - reference(x.row(i));
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(x.rows));
}

template <typename F>
double empirical_norm(const FittedModel& model, F&& reference, const Matrix& x) {
    return empirical_norm(model.params, std::forward<F>(reference), x);
}

}  // namespace enn
