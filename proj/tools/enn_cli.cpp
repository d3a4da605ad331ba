#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "enn/enn.hpp"

namespace {

using nlohmann::json;

// Exit codes: 0 pass, 1 experiment threshold failure, 2 user/config error,
// 3 numerical failure.
constexpr int kExitPass = 0;
constexpr int kExitThresholdFailure = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitNumericalFailure = 3;

std::string tau_tag(double tau) {
    std::string s = enn::detail::format_number(tau);
    return "model_tau" + s + ".json";
}

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    return enn::read_json_file(path);
}

std::string ensure_out_dir(const std::string& flag_value, const json& config) {
    std::string dir = flag_value;
    if (dir.empty()) dir = enn::detail::field_or<std::string>(config, "out", ".");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw enn::ConfigError("cannot create output directory " + dir);
    return dir;
}

struct SeedFlag {
    std::optional<std::uint64_t> value;
};

std::uint64_t resolve_seed(const SeedFlag& flag, const json& config, std::uint64_t fallback) {
    if (flag.value) return *flag.value;
    return enn::detail::field_or<std::uint64_t>(config, "seed", fallback);
}

int cmd_train(const std::string& config_path, const std::string& data_flag,
              const std::vector<double>& tau_flags, const SeedFlag& seed,
              std::optional<int> r_flag, std::optional<double> v_flag,
              std::optional<double> m_flag, const std::string& out_flag) {
    const json config = load_config(config_path);
    const std::string data_path =
        data_flag.empty() ? enn::detail::field_or<std::string>(config, "data", "") : data_flag;
    if (data_path.empty()) throw enn::ConfigError("train: no data file given (--data or config)");

    const enn::Dataset data = enn::read_dataset_csv(data_path);
    const int d = static_cast<int>(data.input_dim());
    const long n = static_cast<long>(data.size());

    std::vector<double> taus = tau_flags;
    if (taus.empty()) taus = enn::detail::field_or(config, "taus", std::vector<double>{});
    if (taus.empty() && enn::detail::find(config, "tau"))
        taus.push_back(enn::detail::field<double>(config, "tau"));
    if (taus.empty()) taus.push_back(0.5);

    const json* sieve_cfg = enn::detail::find(config, "sieve");
    const json empty = json::object();
    if (!sieve_cfg) sieve_cfg = &empty;
    if (enn::detail::find(*sieve_cfg, "d") && enn::detail::field<int>(*sieve_cfg, "d") != d)
        throw enn::ConfigError("train: config sieve dimension disagrees with the CSV");
    const int r = r_flag ? *r_flag
                         : enn::detail::field_or(*sieve_cfg, "r",
                                                 enn::GrowthSchedule(0.25, d).width_at(n));
    const double v = v_flag ? *v_flag
                            : enn::detail::field_or(*sieve_cfg, "v", enn::default_output_budget(r));
    const double m = m_flag ? *m_flag
                            : enn::detail::field_or(*sieve_cfg, "m", enn::default_hidden_budget(r));
    const enn::SieveSpec sieve(r, v, m, d);

    enn::TrainConfig train;
    if (const json* t = enn::detail::find(config, "train")) train = enn::parse_train(*t);
    train.seed = resolve_seed(seed, config, train.seed);

    const std::string out_dir = ensure_out_dir(out_flag, config);
    for (double t : taus) {
        const enn::Tau tau(t);
        const enn::FittedModel model = enn::fit(data, tau, sieve, train);
        const std::string name = taus.size() == 1 ? "model.json" : tau_tag(t);
        const std::string path = out_dir + "/" + name;
        enn::save_model(path, model.params, tau, sieve, model.risk);
        std::cout << "tau=" << enn::detail::format_number(t)
                  << " risk=" << enn::format_double(model.risk) << " model=" << path << "\n";
    }
    return kExitPass;
}

int cmd_predict(const std::string& model_path, const std::string& data_path,
                const std::string& out_flag) {
    if (model_path.empty()) throw enn::ConfigError("predict: --model required");
    if (data_path.empty()) throw enn::ConfigError("predict: --data required");
    const enn::StoredModel model = enn::load_model(model_path);
    const enn::Dataset data = enn::read_dataset_csv(data_path);
    if (data.input_dim() != model.params.input_dim())
        throw enn::ConfigError("predict: data dimension disagrees with the model");

    std::vector<double> y_hat(data.size());
    for (std::size_t i = 0; i < data.x.rows; ++i)
        y_hat[i] = enn::forward(model.params, data.x.row(i));

    const std::string out_dir = ensure_out_dir(out_flag, json::object());
    const std::string path = out_dir + "/predictions.csv";
    enn::write_predictions_csv(path, data.x, y_hat);
    std::cout << "predictions=" << path << "\n";
    return kExitPass;
}

int cmd_bounds(const std::string& config_path, std::optional<double> eps_flag,
               std::optional<long> n_flag, std::optional<double> b_flag,
               std::optional<int> r_flag, std::optional<int> d_flag,
               std::optional<double> v_flag, std::optional<double> m_flag,
               std::optional<double> m1_flag, std::optional<double> m2_flag,
               std::optional<double> tau_flag, std::optional<double> sigma2_flag) {
    const json config = load_config(config_path);
    auto pick_d = [&](const char* key, std::optional<double> flag) -> std::optional<double> {
        if (flag) return flag;
        if (enn::detail::find(config, key)) return enn::detail::field<double>(config, key);
        return std::nullopt;
    };
    auto need = [&](const char* key, std::optional<double> v) -> double {
        if (!v) throw enn::ConfigError(std::string("bounds: missing ") + key);
        return *v;
    };

    const double eps = need("eps", pick_d("eps", eps_flag));
    const long n = n_flag ? *n_flag
                          : static_cast<long>(need("n", pick_d("n", std::nullopt)));
    const double b = need("b", pick_d("b", b_flag));
    const int r = r_flag ? *r_flag : static_cast<int>(need("r", pick_d("r", std::nullopt)));
    const int d = d_flag ? *d_flag
                         : static_cast<int>(pick_d("d", std::nullopt).value_or(1.0));
    const double v = need("v", pick_d("v", v_flag));
    const double m =
        pick_d("m", m_flag).value_or(enn::default_hidden_budget(std::max(1, r)));
    const double tau = pick_d("tau", tau_flag).value_or(0.5);
    const double sigma2 = pick_d("sigma2", sigma2_flag).value_or(0.0);

    const enn::SieveSpec sieve(r, v, m, d);
    enn::BoundInputs inputs(eps, n, b, sieve);
    inputs.response_bound = pick_d("m1", m1_flag);
    inputs.network_bound = pick_d("m2", m2_flag);

    const double log_covering = enn::log_covering_bound(eps, sieve);
    const double log_dev = enn::deviation_bound_log(inputs);
    const double p = enn::param_count(sieve);

    const json out{{"log_covering", log_covering},
                   {"deviation", enn::deviation_bound(inputs)},
                   {"vacuous", log_dev >= 0.0},
                   {"growth_ratio", p * std::log(p) / static_cast<double>(n)},
                   {"identifiability_threshold",
                    enn::identifiability_threshold(enn::Tau(tau), sigma2)}};
    std::cout << out.dump(2) << "\n";
    return kExitPass;
}

int cmd_experiment(const std::string& config_path, const SeedFlag& seed,
                   const std::string& out_flag, std::optional<unsigned> threads_flag) {
    if (config_path.empty()) throw enn::ConfigError("experiment: --config required");
    const json config = enn::read_json_file(config_path);
    const std::uint64_t master_seed = resolve_seed(seed, config, 1);
    const unsigned threads =
        threads_flag ? *threads_flag : enn::detail::field_or<unsigned>(config, "threads", 0);

    const enn::ExperimentReport report = enn::run_experiment(config, master_seed, threads);

    const std::string out_dir = ensure_out_dir(out_flag, config);
    enn::write_report(out_dir + "/report.json", report);
    enn::write_replications_csv(out_dir + "/replications.csv", report);

    for (const auto& cell : report.cells)
        std::cout << cell.id << ": " << (cell.pass ? "pass" : "FAIL") << "\n";
    std::cout << "report=" << out_dir << "/report.json\n";
    return report.pass() ? kExitPass : kExitThresholdFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"expectile neural networks: train, predict, bounds, Monte Carlo experiments"};
    app.require_subcommand(1);

    std::string config_path, data_path, model_path, out_dir;
    std::vector<double> taus;
    SeedFlag seed;
    std::optional<int> r_flag, d_flag;
    std::optional<double> v_flag, m_flag, m1_flag, m2_flag, tau_flag, sigma2_flag;
    std::optional<double> eps_flag, b_flag;
    std::optional<long> n_flag;
    std::optional<unsigned> threads_flag;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file");
        sub->add_option("--seed", seed.value, "master RNG seed");
        sub->add_option("--out", out_dir, "output directory");
    };

    CLI::App* train = app.add_subcommand("train", "fit models on a CSV dataset");
    add_common(train);
    train->add_option("--data", data_path, "CSV file with header x1,...,xd,y");
    train->add_option("--tau", taus, "expectile level (repeatable)");
    train->add_option("--r", r_flag, "hidden width");
    train->add_option("--v", v_flag, "output-layer L1 budget");
    train->add_option("--m", m_flag, "hidden-row L1 budget");

    CLI::App* predict = app.add_subcommand("predict", "evaluate a saved model on a CSV dataset");
    predict->add_option("--model", model_path, "model.json path");
    predict->add_option("--data", data_path, "CSV file with header x1,...,xd,y");
    predict->add_option("--out", out_dir, "output directory");

    CLI::App* bounds = app.add_subcommand("bounds", "evaluate the learning-theory bounds");
    bounds->add_option("--config", config_path, "JSON config file");
    bounds->add_option("--eps", eps_flag, "deviation accuracy");
    bounds->add_option("--n", n_flag, "sample size");
    bounds->add_option("--b", b_flag, "range bound B on the loss");
    bounds->add_option("--r", r_flag, "hidden width");
    bounds->add_option("--d", d_flag, "input dimension");
    bounds->add_option("--v", v_flag, "output-layer L1 budget");
    bounds->add_option("--m", m_flag, "hidden-row L1 budget");
    bounds->add_option("--m1", m1_flag, "response sup bound");
    bounds->add_option("--m2", m2_flag, "network sup bound");
    bounds->add_option("--tau", tau_flag, "expectile level");
    bounds->add_option("--sigma2", sigma2_flag, "noise variance");

    CLI::App* experiment = app.add_subcommand("experiment", "run a Monte Carlo experiment");
    add_common(experiment);
    experiment->add_option("--threads", threads_flag, "worker threads (0 = hardware)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return kExitConfigError;
    }

    try {
        if (train->parsed())
            return cmd_train(config_path, data_path, taus, seed, r_flag, v_flag, m_flag, out_dir);
        if (predict->parsed()) return cmd_predict(model_path, data_path, out_dir);
        if (bounds->parsed())
            return cmd_bounds(config_path, eps_flag, n_flag, b_flag, r_flag, d_flag, v_flag,
                              m_flag, m1_flag, m2_flag, tau_flag, sigma2_flag);
        if (experiment->parsed())
            return cmd_experiment(config_path, seed, out_dir, threads_flag);
    } catch (const enn::NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumericalFailure;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumericalFailure;
    }
    return kExitConfigError;
}
