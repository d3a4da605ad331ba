#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "enn/types.hpp"

namespace enn {

/// Free parameter count of the constraint class: r*(d+2) + 1.
inline double param_count(const SieveSpec& sieve) {
    return static_cast<double>(sieve.width) * (sieve.input_dim + 2.0) + 1.0;
}

/// Log of the sup-norm covering-number bound for the network class at
/// radius eps/3:  p * ln(12 e p (V/4)^2 / (eps (V/4 - 1))) with
/// p = r(d+2)+1. Kept in log space; the plain value overflows doubles for
/// modest widths.
inline double log_covering_bound(double eps, const SieveSpec& sieve) {
    if (!(eps > 0.0)) throw std::invalid_argument("log_covering_bound: eps must be > 0");
    const double quarter_v = sieve.output_budget / 4.0;
    if (!(quarter_v > 1.0))
        throw std::domain_error("covering bound undefined for V <= 4");
    const double p = param_count(sieve);
    const double log_inner = std::log(12.0) + 1.0 + std::log(p) + 2.0 * std::log(quarter_v) -
                             std::log(eps) - std::log(quarter_v - 1.0);
    return p * log_inner;
}

/// Inputs of the uniform-deviation bound: accuracy eps, sample size n, the
/// range bound B on the loss class, and the constraint class. When the
/// response and network sup bounds (M1, M2) are supplied, the covering
/// radius is rescaled by the loss-class Lipschitz factor 2(M1+M2).
struct BoundInputs {
    double eps;
    long n;
    double range_bound;  // B
    SieveSpec sieve;
    std::optional<double> response_bound;  // M1
    std::optional<double> network_bound;   // M2

    BoundInputs(double eps_, long n_, double b_, SieveSpec sieve_)
        : eps(eps_), n(n_), range_bound(b_), sieve(std::move(sieve_)) {
        if (!(eps > 0.0)) throw std::invalid_argument("BoundInputs: eps must be > 0");
        if (n < 1) throw std::invalid_argument("BoundInputs: n must be >= 1");
        if (!(range_bound > 0.0)) throw std::invalid_argument("BoundInputs: B must be > 0");
    }
};

/// Factor mapping an eps-cover of the network class to a 2(M1+M2)*eps
/// cover of the one-sided loss class.
inline double lipschitz_transfer(double m1, double m2) {
    if (m1 < 0.0 || m2 < 0.0)
        throw std::invalid_argument("lipschitz_transfer: bounds must be nonnegative");
    return 2.0 * (m1 + m2);
}

/// Log of the deviation-probability bound before clamping:
/// ln 2 + log covering bound - 2 n eps^2 / (9 B^2).
inline double deviation_bound_log(const BoundInputs& in) {
    double cover_eps = in.eps;
    if (in.response_bound && in.network_bound) {
        const double factor = lipschitz_transfer(*in.response_bound, *in.network_bound);
        if (!(factor > 0.0))
            throw std::invalid_argument("deviation_bound: degenerate Lipschitz factor");
        cover_eps = in.eps / factor;
    }
    const double hoeffding = 2.0 * static_cast<double>(in.n) * in.eps * in.eps /
                             (9.0 * in.range_bound * in.range_bound);
    return std::log(2.0) + log_covering_bound(cover_eps, in.sieve) - hoeffding;
}

/// Probability bound on the sup deviation of the empirical risk, clamped
/// to [0, 1]; values above 1 are vacuous (flag via deviation_bound_log > 0).
inline double deviation_bound(const BoundInputs& in) {
    return std::min(1.0, std::exp(deviation_bound_log(in)));
}

/// Width schedule r_n as a named rule. The power rule r_n = ceil(n^a)
/// covers the cases the experiments use (a = 0 gives a constant width).
struct GrowthSchedule {
    double exponent;  // a in r_n = ceil(n^a)
    int input_dim;

    GrowthSchedule(double a, int d) : exponent(a), input_dim(d) {
        if (a < 0.0) throw std::invalid_argument("GrowthSchedule: exponent must be >= 0");
        if (d < 1) throw std::invalid_argument("GrowthSchedule: input dimension must be >= 1");
    }

    int width_at(long n) const {
        if (n < 1) throw std::invalid_argument("GrowthSchedule: n must be >= 1");
        const double r = std::ceil(std::pow(static_cast<double>(n), exponent));
        return std::max(1, static_cast<int>(r));
    }
};

/// The growth-condition ratio p ln p / n with p = r_n(d+2)+1. Uniform
/// convergence of the empirical risk over the sieve needs this to tend to 0.
inline double growth_condition_ratio(const GrowthSchedule& schedule, long n) {
    if (n < 2) throw std::invalid_argument("growth_condition_ratio: n must be >= 2");
    const double p =
        static_cast<double>(schedule.width_at(n)) * (schedule.input_dim + 2.0) + 1.0;
    return p * std::log(p) / static_cast<double>(n);
}

/// Minimal separation radius (exclusive) at which the identifiability
/// condition eps^2 min{tau, 1-tau} / |1 - 2 tau| > sigma^2 holds:
/// sqrt(sigma^2 |1 - 2 tau| / min{tau, 1-tau}). Zero when tau = 1/2
/// (the condition is restricted to tau != 1/2) or when sigma^2 = 0.
inline double identifiability_threshold(Tau tau, double sigma2) {
    if (sigma2 < 0.0) throw std::invalid_argument("identifiability_threshold: sigma2 must be >= 0");
    const double t = tau.value();
    const double gap = std::fabs(1.0 - 2.0 * t);
    if (gap == 0.0 || sigma2 == 0.0) return 0.0;
    return std::sqrt(sigma2 * gap / std::min(t, 1.0 - t));
}

}  // namespace enn
