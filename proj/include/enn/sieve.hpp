#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "enn/rng.hpp"
#include "enn/types.hpp"

namespace enn {

/// Euclidean projection of v onto the L1 ball of the given radius, in place.
/// Sort-based soft-thresholding: find the shift theta from the sorted
/// magnitudes, then shrink each coordinate toward zero by theta.
inline void project_l1_ball(std::span<double> v, double radius) {
    if (l1_norm(v) <= radius) return;
    std::vector<double> mag(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) mag[i] = std::fabs(v[i]);
    std::sort(mag.begin(), mag.end(), std::greater<>());

    // theta is the largest candidate shift (prefix_k - radius) / k still below
    // the k-th magnitude; coordinates at or below theta leave the support.
    // radius > 0 guarantees the first candidate passes.
    double prefix = 0.0;
    double theta = 0.0;
    for (std::size_t k = 0; k < mag.size(); ++k) {
        prefix += mag[k];
        const double cand = (prefix - radius) / static_cast<double>(k + 1);
        if (cand >= mag[k]) break;
        theta = cand;
    }

    for (double& x : v) {
        const double shrunk = std::fabs(x) - theta;
        x = shrunk > 0.0 ? std::copysign(shrunk, x) : 0.0;
    }

    // Rounding can leave the norm a few ulps above the radius; rescale, then
    // shave single ulps off the largest coordinate until feasibility is exact.
    double norm = l1_norm(v);
    if (norm > radius) {
        const double scale = radius / norm;
        for (double& x : v) x *= scale;
        norm = l1_norm(v);
    }
    while (norm > radius) {
        double* big = &v[0];
        for (double& x : v)
            if (std::fabs(x) > std::fabs(*big)) big = &x;
        const double before = *big;
        *big = std::copysign(std::nextafter(std::fabs(*big), 0.0), *big);
        if (*big == before) break;
        norm = l1_norm(v);
    }
}

namespace detail {

// Both accumulate bias first in a running sum, matching the group-vector
// layout project_sieve feeds to project_l1_ball, so the projection's
// feasibility guarantee survives the recomputation bit for bit.
inline double output_group_l1(const EnnParams& p) {
    double s = std::fabs(p.output_bias);
    for (double w : p.output_weights) s += std::fabs(w);
    return s;
}

inline double hidden_row_l1(const EnnParams& p, std::size_t j) {
    double s = std::fabs(p.hidden_biases[j]);
    for (double w : p.hidden_weights.row(j)) s += std::fabs(w);
    return s;
}

}  // namespace detail

/// Membership test for the constraint class. Both budgets count the bias:
/// |a_0| + sum_j |a_j| <= V and, for every hidden unit,
/// |b_j| + sum_k |w_jk| <= M. Boundary points are feasible.
inline bool in_sieve(const EnnParams& params, const SieveSpec& sieve) {
    if (params.width() != static_cast<std::size_t>(sieve.width) ||
        params.input_dim() != static_cast<std::size_t>(sieve.input_dim))
        return false;
    if (detail::output_group_l1(params) > sieve.output_budget) return false;
    for (std::size_t j = 0; j < params.width(); ++j)
        if (detail::hidden_row_l1(params, j) > sieve.hidden_budget) return false;
    return true;
}

/// Euclidean projection onto the constraint class. The output group
/// (bias, output weights) and each hidden row (bias, row weights) are
/// independent L1 balls, so the projection factorizes group by group.
/// Feasible inputs come back unchanged.
inline EnnParams project_sieve(EnnParams params, const SieveSpec& sieve) {
    std::vector<double> group(params.width() + 1);

    group[0] = params.output_bias;
    std::copy(params.output_weights.begin(), params.output_weights.end(), group.begin() + 1);
    project_l1_ball(group, sieve.output_budget);
    params.output_bias = group[0];
    std::copy(group.begin() + 1, group.end(), params.output_weights.begin());

    group.resize(params.input_dim() + 1);
    for (std::size_t j = 0; j < params.width(); ++j) {
        const auto row = params.hidden_weights.row(j);
        group[0] = params.hidden_biases[j];
        std::copy(row.begin(), row.end(), group.begin() + 1);
        project_l1_ball(group, sieve.hidden_budget);
        params.hidden_biases[j] = group[0];
        std::copy(group.begin() + 1, group.end(), row.begin());
    }
    return params;
}

/// Deterministic draw of a feasible parameter point. Coordinates start
/// uniform on [-1, 1]; each L1 group is then rescaled so its norm equals a
/// uniformly random fraction of its budget, covering the interior of the
/// class rather than only its boundary.
inline EnnParams sample_sieve(const SieveSpec& sieve, std::uint64_t seed) {
    Rng rng(seed);
    EnnParams p(sieve.width, sieve.input_dim);

    p.output_bias = rng.uniform(-1.0, 1.0);
    for (double& w : p.output_weights) w = rng.uniform(-1.0, 1.0);
    for (std::size_t j = 0; j < p.width(); ++j) {
        p.hidden_biases[j] = rng.uniform(-1.0, 1.0);
        for (double& w : p.hidden_weights.row(j)) w = rng.uniform(-1.0, 1.0);
    }

    const double out_norm = detail::output_group_l1(p);
    if (out_norm > 0.0) {
        const double scale = rng.uniform() * sieve.output_budget / out_norm;
        p.output_bias *= scale;
        for (double& w : p.output_weights) w *= scale;
    }
    for (std::size_t j = 0; j < p.width(); ++j) {
        const double row_norm = detail::hidden_row_l1(p, j);
        if (row_norm > 0.0) {
            const double scale = rng.uniform() * sieve.hidden_budget / row_norm;
            p.hidden_biases[j] *= scale;
            for (double& w : p.hidden_weights.row(j)) w *= scale;
        }
    }
    return p;
}

}  // namespace enn
