#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include <json.hpp>

#include "enn/experiments.hpp"

namespace enn {

/// Full-precision decimal rendering for CSV output. JSON output goes
/// through nlohmann's shortest-round-trip formatter; both survive a
/// parse round trip bit-exactly.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            return out;
        }
        out.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
}

inline double parse_number(std::string_view tok, const std::string& path, std::size_t line_no) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw ConfigError(path + " line " + std::to_string(line_no) + ": malformed number '" +
                          std::string(tok) + "'");
    return out;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    return out;
}

inline const nlohmann::json* find(const nlohmann::json& j, const char* key) {
    if (!j.is_object()) return nullptr;
    const auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

inline const nlohmann::json& require(const nlohmann::json& j, const char* key) {
    const auto* v = find(j, key);
    if (!v) throw ConfigError(std::string("config missing key '") + key + "'");
    return *v;
}

template <typename T>
T field(const nlohmann::json& j, const char* key) {
    try {
        return require(j, key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

template <typename T>
T field_or(const nlohmann::json& j, const char* key, T fallback) {
    if (find(j, key) == nullptr) return fallback;
    return field<T>(j, key);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// CSV datasets: header `x1,...,xd,y`, decimal floats, no missing cells.
// ---------------------------------------------------------------------------

inline Dataset read_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);

    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    while (!lines.empty() && detail::trim(lines.back()).empty()) lines.pop_back();
    if (lines.empty()) throw ConfigError(path + ": empty file");

    const auto header = detail::split_fields(lines[0]);
    if (header.size() < 2 || header.back() != "y")
        throw ConfigError(path + ": header must be x1,...,xd,y");
    for (std::size_t i = 0; i + 1 < header.size(); ++i) {
        if (header[i] != "x" + std::to_string(i + 1))
            throw ConfigError(path + ": header must be x1,...,xd,y");
    }
    const std::size_t d = header.size() - 1;
    if (lines.size() < 2) throw ConfigError(path + ": no data rows");

    Dataset data;
    data.x = Matrix(lines.size() - 1, d);
    data.y.resize(lines.size() - 1);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        const auto fields = detail::split_fields(lines[i]);
        if (fields.size() != d + 1)
            throw ConfigError(path + " line " + std::to_string(line_no) + ": expected " +
                              std::to_string(d + 1) + " fields, got " +
                              std::to_string(fields.size()));
        auto row = data.x.row(i - 1);
        for (std::size_t k = 0; k < d; ++k)
            row[k] = detail::parse_number(fields[k], path, line_no);
        data.y[i - 1] = detail::parse_number(fields[d], path, line_no);
    }
    return data;
}

inline void write_dataset_csv(const std::string& path, const Dataset& data) {
    auto out = detail::open_out(path);
    for (std::size_t k = 0; k < data.x.cols; ++k) out << "x" << k + 1 << ",";
    out << "y\n";
    for (std::size_t i = 0; i < data.x.rows; ++i) {
        for (double v : data.x.row(i)) out << format_double(v) << ",";
        out << format_double(data.y[i]) << "\n";
    }
}

inline void write_predictions_csv(const std::string& path, const Matrix& x,
                                  const std::vector<double>& y_hat) {
    auto out = detail::open_out(path);
    for (std::size_t k = 0; k < x.cols; ++k) out << "x" << k + 1 << ",";
    out << "y_hat\n";
    for (std::size_t i = 0; i < x.rows; ++i) {
        for (double v : x.row(i)) out << format_double(v) << ",";
        out << format_double(y_hat[i]) << "\n";
    }
}

// ---------------------------------------------------------------------------
// Model persistence:
// {tau, sieve:{r,v,m,d}, params:{alpha0, alpha[], gamma[][], gamma0[]}, risk}
// ---------------------------------------------------------------------------

inline nlohmann::json params_to_json(const EnnParams& p) {
    nlohmann::json gamma = nlohmann::json::array();
    for (std::size_t j = 0; j < p.hidden_weights.rows; ++j) {
        const auto row = p.hidden_weights.row(j);
        gamma.push_back(std::vector<double>(row.begin(), row.end()));
    }
    return nlohmann::json{{"alpha0", p.output_bias},
                          {"alpha", p.output_weights},
                          {"gamma", std::move(gamma)},
                          {"gamma0", p.hidden_biases}};
}

inline EnnParams params_from_json(const nlohmann::json& j) {
    EnnParams p;
    p.output_bias = detail::field<double>(j, "alpha0");
    p.output_weights = detail::field<std::vector<double>>(j, "alpha");
    p.hidden_biases = detail::field<std::vector<double>>(j, "gamma0");
    const auto& gamma = detail::require(j, "gamma");
    if (!gamma.is_array() || gamma.empty())
        throw ConfigError("model params: gamma must be a nonempty array of rows");
    const std::size_t r = gamma.size();
    if (p.output_weights.size() != r || p.hidden_biases.size() != r)
        throw ConfigError("model params: alpha, gamma and gamma0 sizes disagree");
    std::size_t d = 0;
    for (std::size_t jr = 0; jr < r; ++jr) {
        std::vector<double> row;
        try {
            row = gamma[jr].get<std::vector<double>>();
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("model params: gamma: ") + e.what());
        }
        if (jr == 0) {
            d = row.size();
            if (d == 0) throw ConfigError("model params: gamma rows must be nonempty");
            p.hidden_weights = Matrix(r, d);
        } else if (row.size() != d) {
            throw ConfigError("model params: gamma rows have unequal lengths");
        }
        std::copy(row.begin(), row.end(), p.hidden_weights.row(jr).begin());
    }
    check_params(p);
    return p;
}

struct StoredModel {
    EnnParams params;
    Tau tau;
    SieveSpec sieve;
    double risk;
};

inline nlohmann::json model_to_json(const EnnParams& p, Tau tau, const SieveSpec& sieve,
                                    double risk) {
    return nlohmann::json{{"tau", tau.value()},
                          {"sieve",
                           {{"r", sieve.width},
                            {"v", sieve.output_budget},
                            {"m", sieve.hidden_budget},
                            {"d", sieve.input_dim}}},
                          {"params", params_to_json(p)},
                          {"risk", risk}};
}

inline StoredModel model_from_json(const nlohmann::json& j) {
    const auto& s = detail::require(j, "sieve");
    const SieveSpec sieve(detail::field<int>(s, "r"), detail::field<double>(s, "v"),
                          detail::field<double>(s, "m"), detail::field<int>(s, "d"));
    EnnParams params = params_from_json(detail::require(j, "params"));
    if (params.width() != static_cast<std::size_t>(sieve.width) ||
        params.input_dim() != static_cast<std::size_t>(sieve.input_dim))
        throw ConfigError("model params do not match the declared sieve");
    return StoredModel{std::move(params), Tau(detail::field<double>(j, "tau")), sieve,
                       detail::field<double>(j, "risk")};
}

inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
    auto out = detail::open_out(path);
    out << j.dump(2) << "\n";
}

inline void save_model(const std::string& path, const EnnParams& p, Tau tau,
                       const SieveSpec& sieve, double risk) {
    write_json_file(path, model_to_json(p, tau, sieve, risk));
}

inline StoredModel load_model(const std::string& path) {
    return model_from_json(read_json_file(path));
}

// ---------------------------------------------------------------------------
// Experiment reports:
// {experiment, seed, cells:[{id, params, replications, aggregates,
//  threshold, pass}]}
// ---------------------------------------------------------------------------

inline nlohmann::json report_to_json(const ExperimentReport& report) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& cell : report.cells) {
        nlohmann::json params = nlohmann::json::object();
        for (const auto& [k, v] : cell.params) params[k] = v;
        for (const auto& [k, v] : cell.labels) params[k] = v;
        nlohmann::json reps = nlohmann::json::array();
        for (const auto& row : cell.replications) {
            nlohmann::json jr{{"index", row.index}};
            for (const auto& [k, v] : row.values) jr[k] = v;
            reps.push_back(std::move(jr));
        }
        nlohmann::json aggregates = nlohmann::json::object();
        for (const auto& [k, v] : cell.aggregates) aggregates[k] = v;
        nlohmann::json threshold = nlohmann::json::object();
        for (const auto& [k, v] : cell.thresholds) threshold[k] = v;
        cells.push_back({{"id", cell.id},
                         {"params", std::move(params)},
                         {"replications", std::move(reps)},
                         {"aggregates", std::move(aggregates)},
                         {"threshold", std::move(threshold)},
                         {"pass", cell.pass}});
    }
    return nlohmann::json{
        {"experiment", report.experiment}, {"seed", report.seed}, {"cells", std::move(cells)}};
}

inline void write_report(const std::string& path, const ExperimentReport& report) {
    write_json_file(path, report_to_json(report));
}

/// Long-format dump of every per-replication value, one row per
/// (cell, replication, key).
inline void write_replications_csv(const std::string& path, const ExperimentReport& report) {
    auto out = detail::open_out(path);
    out << "cell,replication,key,value\n";
    for (const auto& cell : report.cells) {
        for (const auto& row : cell.replications) {
            for (const auto& [k, v] : row.values)
                out << cell.id << "," << row.index << "," << k << "," << format_double(v)
                    << "\n";
        }
    }
}

// ---------------------------------------------------------------------------
// Experiment configs as JSON documents.
// ---------------------------------------------------------------------------

inline TargetSpec parse_target(const nlohmann::json& j) {
    const std::string kind = detail::field<std::string>(j, "kind");
    if (kind == "constant") return TargetSpec::constant(detail::field_or(j, "c", 0.0));
    if (kind == "linear")
        return TargetSpec::linear(detail::field_or(j, "a", 0.0), detail::field_or(j, "b", 1.0));
    if (kind == "sine")
        return TargetSpec::sine(detail::field_or(j, "amplitude", 1.0),
                                detail::field_or(j, "frequency", 1.0));
    if (kind == "feasible_enn")
        return TargetSpec::feasible_enn(params_from_json(detail::require(j, "params")));
    throw ConfigError("unknown target kind: " + kind);
}

inline NoiseSpec parse_noise(const nlohmann::json& j) {
    const std::string kind = detail::field<std::string>(j, "kind");
    if (kind == "none") return NoiseSpec::none();
    if (kind == "gaussian") return NoiseSpec::gaussian(detail::field<double>(j, "sigma2"));
    if (kind == "uniform") return NoiseSpec::uniform(detail::field<double>(j, "sigma2"));
    throw ConfigError("unknown noise kind: " + kind);
}

inline TrainConfig parse_train(const nlohmann::json& j, TrainConfig base = {}) {
    base.step_size = detail::field_or(j, "step_size", base.step_size);
    base.max_iters = detail::field_or(j, "max_iters", base.max_iters);
    base.grad_tol = detail::field_or(j, "grad_tol", base.grad_tol);
    base.restarts = detail::field_or(j, "restarts", base.restarts);
    base.check();
    return base;
}

inline SieveSpec parse_sieve(const nlohmann::json& j) {
    return SieveSpec(detail::field<int>(j, "r"), detail::field<double>(j, "v"),
                     detail::field<double>(j, "m"), detail::field<int>(j, "d"));
}

inline GrowthSchedule parse_schedule(const nlohmann::json& j) {
    return GrowthSchedule(detail::field_or(j, "exponent", 0.25), detail::field_or(j, "d", 1));
}

/// Builds and runs the experiment named by `config`. The master seed and
/// thread count are resolved by the caller (CLI flags override config keys).
inline ExperimentReport run_experiment(const nlohmann::json& config, std::uint64_t master_seed,
                                       unsigned threads) {
    const std::string name = detail::field<std::string>(config, "experiment");

    if (name == "ulln") {
        UllnConfig cfg;
        if (const auto* v = detail::find(config, "schedule")) cfg.schedule = parse_schedule(*v);
        cfg.n_grid = detail::field_or(config, "n_grid", cfg.n_grid);
        cfg.networks_per_cell = detail::field_or(config, "networks", cfg.networks_per_cell);
        cfg.probes = detail::field_or(config, "probes", cfg.probes);
        cfg.replications = detail::field_or(config, "replications", cfg.replications);
        cfg.tau = detail::field_or(config, "tau", cfg.tau);
        if (const auto* v = detail::find(config, "target")) cfg.target = parse_target(*v);
        if (const auto* v = detail::find(config, "noise")) cfg.noise = parse_noise(*v);
        cfg.oracle_points = detail::field_or(config, "oracle_points", cfg.oracle_points);
        cfg.slope_min = detail::field_or(config, "slope_min", cfg.slope_min);
        cfg.slope_max = detail::field_or(config, "slope_max", cfg.slope_max);
        cfg.threads = threads;
        return run_ulln(cfg, master_seed);
    }

    if (name == "consistency") {
        ConsistencyConfig cfg;
        cfg.target = parse_target(detail::require(config, "target"));
        if (const auto* v = detail::find(config, "noise")) cfg.noise = parse_noise(*v);
        cfg.taus = detail::field_or(config, "taus", cfg.taus);
        if (const auto* v = detail::find(config, "schedule")) cfg.schedule = parse_schedule(*v);
        cfg.n_grid = detail::field_or(config, "n_grid", cfg.n_grid);
        cfg.replications = detail::field_or(config, "replications", cfg.replications);
        if (const auto* v = detail::find(config, "train")) cfg.train = parse_train(*v);
        cfg.norm_ceiling = detail::field_or(config, "norm_ceiling", cfg.norm_ceiling);
        cfg.threads = threads;
        return run_consistency(cfg, master_seed);
    }

    if (name == "approximation") {
        ApproximationConfig cfg;
        if (const auto* v = detail::find(config, "target")) cfg.target = parse_target(*v);
        cfg.r_grid = detail::field_or(config, "r_grid", cfg.r_grid);
        cfg.n = detail::field_or(config, "n", cfg.n);
        cfg.d = detail::field_or(config, "d", cfg.d);
        cfg.replications = detail::field_or(config, "replications", cfg.replications);
        if (const auto* v = detail::find(config, "train")) cfg.train = parse_train(*v);
        cfg.oracle_points = detail::field_or(config, "oracle_points", cfg.oracle_points);
        if (detail::find(config, "final_error_max"))
            cfg.final_error_max = detail::field<double>(config, "final_error_max");
        cfg.threads = threads;
        return run_approximation(cfg, master_seed);
    }

    if (name == "normality") {
        NormalityConfig cfg;
        if (const auto* v = detail::find(config, "target")) cfg.target = parse_target(*v);
        if (const auto* v = detail::find(config, "noise")) cfg.noise = parse_noise(*v);
        cfg.tau = detail::field_or(config, "tau", cfg.tau);
        cfg.n = detail::field_or(config, "n", cfg.n);
        cfg.d = detail::field_or(config, "d", cfg.d);
        cfg.replications = detail::field_or(config, "replications", cfg.replications);
        if (const auto* v = detail::find(config, "sieve")) cfg.sieve = parse_sieve(*v);
        if (const auto* v = detail::find(config, "train")) cfg.train = parse_train(*v);
        cfg.romberg_oracle = cfg.d == 1;
        if (const auto* v = detail::find(config, "oracle")) {
            const std::string oracle = v->get<std::string>();
            if (oracle == "romberg")
                cfg.romberg_oracle = true;
            else if (oracle == "monte_carlo")
                cfg.romberg_oracle = false;
            else
                throw ConfigError("unknown oracle kind: " + oracle);
        }
        cfg.oracle_points = detail::field_or(config, "oracle_points", cfg.oracle_points);
        cfg.threads = threads;
        return run_normality(cfg, master_seed);
    }

    throw ConfigError("unknown experiment: " + name);
}

}  // namespace enn
