#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "enn/bounds.hpp"
#include "enn/oracle.hpp"
#include "enn/parallel.hpp"
#include "enn/sieve.hpp"
#include "enn/stats.hpp"
#include "enn/targets.hpp"
#include "enn/train.hpp"

namespace enn {

/// A malformed or degenerate experiment configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

using NamedValues = std::vector<std::pair<std::string, double>>;
using NamedLabels = std::vector<std::pair<std::string, std::string>>;

struct ReplicationRow {
    int index = 0;
    NamedValues values;
};

/// One grid point of an experiment (or a summary row holding cross-cell
/// verdicts). Aggregates are always recomputable from the replication rows.
struct CellResult {
    std::string id;
    NamedValues params;
    NamedLabels labels;
    std::vector<ReplicationRow> replications;
    NamedValues aggregates;
    NamedValues thresholds;
    bool pass = true;
};

struct ExperimentReport {
    std::string experiment;
    std::uint64_t seed = 0;
    std::vector<CellResult> cells;

    bool pass() const {
        return std::all_of(cells.begin(), cells.end(),
                           [](const CellResult& c) { return c.pass; });
    }
};

namespace detail {

inline void put(NamedValues& v, std::string key, double value) {
    v.emplace_back(std::move(key), value);
}

inline double get(const NamedValues& v, const std::string& key) {
    for (const auto& [k, val] : v)
        if (k == key) return val;
    throw std::logic_error("missing named value: " + key);
}

inline std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

// Sub-stream tags hung off the master seed so data, training, sampled
// networks, oracles and probes never collide.
namespace stream {
constexpr std::uint64_t kData = 1;
constexpr std::uint64_t kTrain = 2;
constexpr std::uint64_t kNetwork = 3;
constexpr std::uint64_t kOracle = 4;
constexpr std::uint64_t kProbe = 5;
}  // namespace stream

}  // namespace detail

/// Default budget schedules. The theory only requires the budgets to
/// diverge; these defaults keep the growth-condition ratio shrinking under
/// the r_n = ceil(n^(1/4)) width rule.
inline double default_output_budget(int r) { return std::max(4.0, 2.0 + r); }
inline double default_hidden_budget(int r) {
    return 10.0 * (1.0 + std::log(static_cast<double>(r)));
}
inline SieveSpec default_sieve(int r, int d) {
    return SieveSpec(r, default_output_budget(r), default_hidden_budget(r), d);
}

// ---------------------------------------------------------------------------
// ULLN experiment: the sup over sampled feasible networks of the centered
// empirical risk |R_hat(f) - R(f)|, computed through the one-sided g1/g2
// split, against a fixed-seed population oracle sample.
// ---------------------------------------------------------------------------

struct UllnConfig {
    GrowthSchedule schedule{0.25, 1};
    std::vector<long> n_grid{100, 1000, 10000};
    int networks_per_cell = 200;
    int probes = 1;
    int replications = 10;
    double tau = 0.5;
    TargetSpec target = TargetSpec::sine(1.0, 1.0);
    NoiseSpec noise = NoiseSpec::gaussian(0.25);
    long oracle_points = 1'000'000;
    double slope_min = -0.7;
    double slope_max = -0.3;
    unsigned threads = 0;
};

inline ExperimentReport run_ulln(const UllnConfig& cfg, std::uint64_t master_seed) {
    if (cfg.n_grid.size() < 2 || !std::is_sorted(cfg.n_grid.begin(), cfg.n_grid.end()))
        throw ConfigError("ulln: n grid must be ascending with at least two points");
    if (cfg.networks_per_cell < 1) throw ConfigError("ulln: networks_per_cell must be >= 1");
    if (cfg.replications < 1) throw ConfigError("ulln: replications must be >= 1");
    if (cfg.probes < 0) throw ConfigError("ulln: probes must be >= 0");
    if (cfg.oracle_points < 10 * cfg.n_grid.back())
        throw ConfigError("ulln: oracle sample too small relative to the n grid");
    for (std::size_t i = 1; i < cfg.n_grid.size(); ++i) {
        if (growth_condition_ratio(cfg.schedule, cfg.n_grid[i]) >=
            growth_condition_ratio(cfg.schedule, cfg.n_grid[i - 1]))
            throw ConfigError("ulln: growth-condition ratio must decrease along the n grid");
    }

    const Tau tau(cfg.tau);
    const int d = cfg.schedule.input_dim;

    ExperimentReport report;
    report.experiment = "ulln";
    report.seed = master_seed;

    const Dataset oracle = generate_dataset(
        cfg.target, cfg.noise, cfg.oracle_points, d,
        derive_seed(master_seed, {detail::stream::kOracle}));

    // Probe networks are fixed across the whole grid (drawn from the first
    // cell's class) so their deviation traces a single function over n.
    const SieveSpec probe_sieve = default_sieve(cfg.schedule.width_at(cfg.n_grid.front()), d);
    std::vector<EnnParams> probes;
    std::vector<double> probe_pop_risk;
    for (int p = 0; p < cfg.probes; ++p) {
        probes.push_back(sample_sieve(
            probe_sieve, derive_seed(master_seed, {detail::stream::kProbe,
                                                   static_cast<std::uint64_t>(p)})));
        probe_pop_risk.push_back(empirical_risk_split(probes.back(), oracle).combine(tau));
    }

    std::vector<std::vector<double>> probe_medians(cfg.probes);
    std::vector<double> sup_medians;

    for (long n : cfg.n_grid) {
        const int r = cfg.schedule.width_at(n);
        const SieveSpec sieve = default_sieve(r, d);
        CellResult cell;
        cell.id = "n=" + std::to_string(n);
        const std::uint64_t cell_key = hash_label(cell.id);
        detail::put(cell.params, "n", static_cast<double>(n));
        detail::put(cell.params, "r", r);
        detail::put(cell.params, "v", sieve.output_budget);
        detail::put(cell.params, "m", sieve.hidden_budget);
        detail::put(cell.params, "tau", cfg.tau);
        detail::put(cell.params, "replications", cfg.replications);
        detail::put(cell.params, "networks", cfg.networks_per_cell);

        // Networks are drawn once per cell and shared across replications;
        // their population risks against the fixed oracle amortize likewise.
        std::vector<EnnParams> nets(cfg.networks_per_cell);
        for (int k = 0; k < cfg.networks_per_cell; ++k)
            nets[k] = sample_sieve(sieve, derive_seed(master_seed,
                                                      {cell_key, detail::stream::kNetwork,
                                                       static_cast<std::uint64_t>(k)}));
        std::vector<double> pop_risk(nets.size());
        parallel_for(nets.size(), cfg.threads, [&](std::size_t k) {
            pop_risk[k] = empirical_risk_split(nets[k], oracle).combine(tau);
        });

        cell.replications.resize(cfg.replications);
        parallel_for(cfg.replications, cfg.threads, [&](std::size_t rep) {
            const Dataset data = generate_dataset(
                cfg.target, cfg.noise, n, d,
                derive_seed(master_seed, {cell_key, detail::stream::kData, rep}));
            double sup_dev = 0.0;
            for (std::size_t k = 0; k < nets.size(); ++k) {
                const double emp = empirical_risk_split(nets[k], data).combine(tau);
                sup_dev = std::max(sup_dev, std::fabs(emp - pop_risk[k]));
            }
            ReplicationRow row;
            row.index = static_cast<int>(rep);
            detail::put(row.values, "sup_dev", sup_dev);
            for (int p = 0; p < cfg.probes; ++p) {
                const double emp = empirical_risk_split(probes[p], data).combine(tau);
                detail::put(row.values, "probe" + std::to_string(p) + "_dev",
                            std::fabs(emp - probe_pop_risk[p]));
            }
            cell.replications[rep] = std::move(row);
        });

        std::vector<double> sups;
        for (const auto& row : cell.replications) sups.push_back(detail::get(row.values, "sup_dev"));
        const double med_sup = median(sups);
        sup_medians.push_back(med_sup);
        detail::put(cell.aggregates, "median_sup_dev", med_sup);
        for (int p = 0; p < cfg.probes; ++p) {
            std::vector<double> devs;
            const std::string key = "probe" + std::to_string(p) + "_dev";
            for (const auto& row : cell.replications) devs.push_back(detail::get(row.values, key));
            const double med = median(devs);
            probe_medians[p].push_back(med);
            detail::put(cell.aggregates, "median_" + key, med);
        }
        report.cells.push_back(std::move(cell));
    }

    CellResult summary;
    summary.id = "summary";
    bool decreasing = true;
    for (std::size_t i = 1; i < sup_medians.size(); ++i)
        decreasing = decreasing && (sup_medians[i] < sup_medians[i - 1]);
    detail::put(summary.aggregates, "sup_dev_strictly_decreasing", decreasing ? 1.0 : 0.0);

    std::vector<double> log_n;
    for (long n : cfg.n_grid) log_n.push_back(std::log(static_cast<double>(n)));
    bool slopes_ok = true;
    for (int p = 0; p < cfg.probes; ++p) {
        std::vector<double> log_dev;
        for (double m : probe_medians[p]) log_dev.push_back(std::log(m));
        const double slope = regression_slope(log_n, log_dev);
        detail::put(summary.aggregates, "probe" + std::to_string(p) + "_slope", slope);
        slopes_ok = slopes_ok && slope >= cfg.slope_min && slope <= cfg.slope_max;
    }
    detail::put(summary.thresholds, "slope_min", cfg.slope_min);
    detail::put(summary.thresholds, "slope_max", cfg.slope_max);
    summary.pass = decreasing && slopes_ok;
    report.cells.push_back(std::move(summary));
    return report;
}

// ---------------------------------------------------------------------------
// Consistency experiment: the design-point RMS distance between the fitted
// network and the truth, along a growing n grid.
// ---------------------------------------------------------------------------

struct ConsistencyConfig {
    TargetSpec target;
    NoiseSpec noise = NoiseSpec::gaussian(0.25);
    std::vector<double> taus{0.5};
    GrowthSchedule schedule{0.25, 1};
    std::vector<long> n_grid{250, 1000, 4000};
    int replications = 20;
    TrainConfig train;
    double norm_ceiling = 0.5;  // bound on the median norm at the largest n
    unsigned threads = 0;
};

inline ExperimentReport run_consistency(const ConsistencyConfig& cfg, std::uint64_t master_seed) {
    if (cfg.n_grid.size() < 2 || !std::is_sorted(cfg.n_grid.begin(), cfg.n_grid.end()))
        throw ConfigError("consistency: n grid must be ascending with at least two points");
    if (cfg.replications < 1) throw ConfigError("consistency: replications must be >= 1");
    if (cfg.taus.empty()) throw ConfigError("consistency: at least one tau required");
    if (!(cfg.norm_ceiling > 0.0)) throw ConfigError("consistency: norm ceiling must be > 0");
    cfg.train.check();

    const int d = cfg.schedule.input_dim;
    ExperimentReport report;
    report.experiment = "consistency";
    report.seed = master_seed;

    for (double tau_value : cfg.taus) {
        const Tau tau(tau_value);
        std::vector<double> medians;
        for (long n : cfg.n_grid) {
            const int r = cfg.schedule.width_at(n);
            const SieveSpec sieve = default_sieve(r, d);
            CellResult cell;
            cell.id = "tau=" + detail::format_number(tau_value) + ":n=" + std::to_string(n);
            const std::uint64_t cell_key = hash_label(cell.id);
            detail::put(cell.params, "tau", tau_value);
            detail::put(cell.params, "n", static_cast<double>(n));
            detail::put(cell.params, "r", r);
            detail::put(cell.params, "v", sieve.output_budget);
            detail::put(cell.params, "m", sieve.hidden_budget);
            detail::put(cell.params, "replications", cfg.replications);
            cell.labels.emplace_back("target", cfg.target.name());
            cell.labels.emplace_back("noise", cfg.noise.name());
            if (tau_value != 0.5)
                detail::put(cell.aggregates, "identifiability_threshold",
                            identifiability_threshold(tau, cfg.noise.sigma2));

            cell.replications.resize(cfg.replications);
            parallel_for(cfg.replications, cfg.threads, [&](std::size_t rep) {
                const Dataset data = generate_dataset(
                    cfg.target, cfg.noise, n, d,
                    derive_seed(master_seed, {cell_key, detail::stream::kData, rep}));
                TrainConfig train = cfg.train;
                train.seed = derive_seed(master_seed, {cell_key, detail::stream::kTrain, rep});
                const FittedModel model = fit(data, tau, sieve, train);
                ReplicationRow row;
                row.index = static_cast<int>(rep);
                detail::put(row.values, "norm", empirical_norm(model, cfg.target, data.x));
                detail::put(row.values, "risk", model.risk);
                detail::put(row.values, "iterations", model.iterations);
                detail::put(row.values, "converged", model.converged ? 1.0 : 0.0);
                cell.replications[rep] = std::move(row);
            });

            std::vector<double> norms;
            for (const auto& row : cell.replications)
                norms.push_back(detail::get(row.values, "norm"));
            const double med = median(norms);
            medians.push_back(med);
            detail::put(cell.aggregates, "median_norm", med);
            report.cells.push_back(std::move(cell));
        }

        CellResult summary;
        summary.id = "tau=" + detail::format_number(tau_value) + ":summary";
        detail::put(summary.params, "tau", tau_value);
        const bool shrinks = medians.back() < medians.front();
        const bool under_ceiling = medians.back() < cfg.norm_ceiling;
        detail::put(summary.aggregates, "median_norm_first", medians.front());
        detail::put(summary.aggregates, "median_norm_last", medians.back());
        detail::put(summary.aggregates, "norm_shrinks", shrinks ? 1.0 : 0.0);
        detail::put(summary.thresholds, "norm_ceiling", cfg.norm_ceiling);
        // Noiseless runs measure recovery, where the norm is pure optimization
        // error and need not fall with n; only the ceiling applies there.
        const bool noiseless = cfg.noise.kind == NoiseSpec::Kind::None;
        summary.pass = under_ceiling && (shrinks || noiseless);
        report.cells.push_back(std::move(summary));
    }
    return report;
}

// ---------------------------------------------------------------------------
// Approximation experiment: squared L2(mu) distance between the fitted
// network and a continuous target, along a growing width grid, on
// noiseless data.
// ---------------------------------------------------------------------------

struct ApproximationConfig {
    TargetSpec target = TargetSpec::sine(1.0, 1.0);
    std::vector<int> r_grid{1, 4, 16};
    long n = 1000;
    int d = 1;
    int replications = 9;
    TrainConfig train;
    long oracle_points = 100'000;
    std::optional<double> final_error_max;  // ceiling on the largest-width median
    unsigned threads = 0;
};

inline ExperimentReport run_approximation(const ApproximationConfig& cfg,
                                          std::uint64_t master_seed) {
    if (cfg.r_grid.empty() || !std::is_sorted(cfg.r_grid.begin(), cfg.r_grid.end()))
        throw ConfigError("approximation: r grid must be ascending and nonempty");
    if (cfg.replications < 1) throw ConfigError("approximation: replications must be >= 1");
    if (cfg.n < 1) throw ConfigError("approximation: n must be >= 1");
    if (cfg.oracle_points < 1000) throw ConfigError("approximation: oracle sample too small");
    cfg.train.check();

    ExperimentReport report;
    report.experiment = "approximation";
    report.seed = master_seed;

    const FunctionalOracle oracle = FunctionalOracle::monte_carlo(
        cfg.d, cfg.oracle_points, derive_seed(master_seed, {detail::stream::kOracle}));

    std::vector<double> medians;
    for (int r : cfg.r_grid) {
        const SieveSpec sieve = default_sieve(r, cfg.d);
        CellResult cell;
        cell.id = "r=" + std::to_string(r);
        const std::uint64_t cell_key = hash_label(cell.id);
        detail::put(cell.params, "r", r);
        detail::put(cell.params, "v", sieve.output_budget);
        detail::put(cell.params, "m", sieve.hidden_budget);
        detail::put(cell.params, "n", static_cast<double>(cfg.n));
        detail::put(cell.params, "replications", cfg.replications);
        cell.labels.emplace_back("target", cfg.target.name());

        cell.replications.resize(cfg.replications);
        parallel_for(cfg.replications, cfg.threads, [&](std::size_t rep) {
            const Dataset data = generate_dataset(
                cfg.target, NoiseSpec::none(), cfg.n, cfg.d,
                derive_seed(master_seed, {cell_key, detail::stream::kData, rep}));
            TrainConfig train = cfg.train;
            train.seed = derive_seed(master_seed, {cell_key, detail::stream::kTrain, rep});
            const FittedModel model = fit(data, Tau(0.5), sieve, train);
            const double err = oracle.expectation([&](std::span<const double> x) {
                const double diff = forward(model.params, x) - cfg.target(x);
                return diff * diff;
            });
            ReplicationRow row;
            row.index = static_cast<int>(rep);
            detail::put(row.values, "l2_error_sq", err);
            detail::put(row.values, "risk", model.risk);
            cell.replications[rep] = std::move(row);
        });

        std::vector<double> errs;
        for (const auto& row : cell.replications)
            errs.push_back(detail::get(row.values, "l2_error_sq"));
        const double med = median(errs);
        medians.push_back(med);
        detail::put(cell.aggregates, "median_l2_error_sq", med);
        report.cells.push_back(std::move(cell));
    }

    CellResult summary;
    summary.id = "summary";
    bool nonincreasing = true;
    for (std::size_t i = 1; i < medians.size(); ++i)
        nonincreasing = nonincreasing && (medians[i] <= medians[i - 1]);
    detail::put(summary.aggregates, "error_nonincreasing", nonincreasing ? 1.0 : 0.0);
    detail::put(summary.aggregates, "median_error_final", medians.back());
    summary.pass = nonincreasing;
    if (cfg.final_error_max) {
        detail::put(summary.thresholds, "final_error_max", *cfg.final_error_max);
        summary.pass = summary.pass && medians.back() < *cfg.final_error_max;
    }
    report.cells.push_back(std::move(summary));
    return report;
}

// ---------------------------------------------------------------------------
// Normality experiment: the centered plug-in statistic
// S = (1/sqrt(n)) sum_i (f_hat(X_i) - P f_hat) across replications against
// N(0, v0) with v0 = P f0^2 - (P f0)^2, plus the companion centered
// difference statistic.
// ---------------------------------------------------------------------------

struct NormalityConfig {
    TargetSpec target = TargetSpec::linear(0.0, 1.0);
    NoiseSpec noise = NoiseSpec::gaussian(0.25);
    double tau = 0.5;
    long n = 2000;
    int d = 1;
    int replications = 500;
    std::optional<SieveSpec> sieve;  // default: width ceil(n^(1/4)) with default budgets
    TrainConfig train;
    bool romberg_oracle = true;  // d = 1 only; otherwise Monte Carlo
    long oracle_points = 1'000'000;
    unsigned threads = 0;
};

inline ExperimentReport run_normality(const NormalityConfig& cfg, std::uint64_t master_seed) {
    if (cfg.replications < 200) throw ConfigError("normality: at least 200 replications required");
    if (cfg.n < 2) throw ConfigError("normality: n must be >= 2");
    if (cfg.romberg_oracle && cfg.d != 1)
        throw ConfigError("normality: the Romberg oracle requires d = 1");
    cfg.train.check();
    const Tau tau(cfg.tau);

    const SieveSpec sieve =
        cfg.sieve ? *cfg.sieve : default_sieve(GrowthSchedule(0.25, cfg.d).width_at(cfg.n), cfg.d);

    const FunctionalOracle oracle =
        cfg.romberg_oracle
            ? FunctionalOracle::romberg()
            : FunctionalOracle::monte_carlo(cfg.d, cfg.oracle_points,
                                            derive_seed(master_seed, {detail::stream::kOracle}));

    const double p_f0 = oracle.expectation(cfg.target);
    const double p_f0_sq =
        oracle.expectation([&](std::span<const double> x) { return cfg.target(x) * cfg.target(x); });
    const double v0 = p_f0_sq - p_f0 * p_f0;
    if (!(v0 > 1e-12))
        throw ConfigError("normality: degenerate cell, limit variance v0 = 0");

    ExperimentReport report;
    report.experiment = "normality";
    report.seed = master_seed;

    CellResult cell;
    cell.id = "n=" + std::to_string(cfg.n) + ":tau=" + detail::format_number(cfg.tau);
    const std::uint64_t cell_key = hash_label(cell.id);
    detail::put(cell.params, "n", static_cast<double>(cfg.n));
    detail::put(cell.params, "tau", cfg.tau);
    detail::put(cell.params, "r", sieve.width);
    detail::put(cell.params, "v", sieve.output_budget);
    detail::put(cell.params, "m", sieve.hidden_budget);
    detail::put(cell.params, "replications", cfg.replications);
    detail::put(cell.params, "sigma2", cfg.noise.sigma2);
    cell.labels.emplace_back("target", cfg.target.name());
    cell.labels.emplace_back("noise", cfg.noise.name());

    const double sqrt_n = std::sqrt(static_cast<double>(cfg.n));
    cell.replications.resize(cfg.replications);
    parallel_for(cfg.replications, cfg.threads, [&](std::size_t rep) {
        const Dataset data = generate_dataset(
            cfg.target, cfg.noise, cfg.n, cfg.d,
            derive_seed(master_seed, {cell_key, detail::stream::kData, rep}));
        TrainConfig train = cfg.train;
        train.seed = derive_seed(master_seed, {cell_key, detail::stream::kTrain, rep});
        const FittedModel model = fit(data, tau, sieve, train);

        const double p_fhat = oracle.expectation(
            [&](std::span<const double> x) { return forward(model.params, x); });
        double sum_fhat = 0.0, sum_diff = 0.0;
        for (std::size_t i = 0; i < data.x.rows; ++i) {
            const double fhat = forward(model.params, data.x.row(i));
            sum_fhat += fhat - p_fhat;
            sum_diff += (fhat - cfg.target(data.x.row(i))) - (p_fhat - p_f0);
        }
        ReplicationRow row;
        row.index = static_cast<int>(rep);
        detail::put(row.values, "s_statistic", sum_fhat / sqrt_n);
        detail::put(row.values, "centered_diff", sum_diff / sqrt_n);
        detail::put(row.values, "risk", model.risk);
        cell.replications[rep] = std::move(row);
    });

    std::vector<double> s_values, abs_diff;
    for (const auto& row : cell.replications) {
        s_values.push_back(detail::get(row.values, "s_statistic"));
        abs_diff.push_back(std::fabs(detail::get(row.values, "centered_diff")));
    }
    const double ks =
        ks_statistic(s_values, [&](double x) { return normal_cdf(x, 0.0, v0); });
    const double spread = std::sqrt(sample_variance(s_values));
    const double med_abs_diff = median(abs_diff);
    const double ks_max = ks_critical_1pct(s_values.size());

    detail::put(cell.aggregates, "v0", v0);
    detail::put(cell.aggregates, "ks_statistic", ks);
    detail::put(cell.aggregates, "s_spread", spread);
    detail::put(cell.aggregates, "median_abs_centered_diff", med_abs_diff);
    detail::put(cell.thresholds, "ks_max", ks_max);
    cell.pass = ks < ks_max && med_abs_diff < spread;
    report.cells.push_back(std::move(cell));
    return report;
}

}  // namespace enn
