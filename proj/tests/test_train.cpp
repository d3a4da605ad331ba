#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "enn/rng.hpp"
#include "enn/targets.hpp"
#include "enn/train.hpp"

using namespace enn;

namespace {

double params_gap(const EnnParams& a, const EnnParams& b) {
    double s = std::fabs(a.output_bias - b.output_bias);
    for (std::size_t j = 0; j < a.output_weights.size(); ++j)
        s = std::max(s, std::fabs(a.output_weights[j] - b.output_weights[j]));
    for (std::size_t j = 0; j < a.hidden_biases.size(); ++j)
        s = std::max(s, std::fabs(a.hidden_biases[j] - b.hidden_biases[j]));
    for (std::size_t k = 0; k < a.hidden_weights.data.size(); ++k)
        s = std::max(s, std::fabs(a.hidden_weights.data[k] - b.hidden_weights.data[k]));
    return s;
}

}  // namespace

TEST_CASE("fit_constant agrees with the bisection oracle") {
    const double taus[] = {0.1, 0.25, 0.5, 0.75, 0.9};
    Rng rng(5100);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 200.0);
        std::vector<double> y(n);
        for (double& v : y) v = rng.uniform(-10.0, 10.0);
        const Tau tau(taus[trial % 5]);
        CHECK(std::fabs(fit_constant(y, tau) - expectile_by_bisection(y, tau)) < 1e-10);
    }
}

TEST_CASE("fit_constant golden values") {
    const std::vector<double> y{0.0, 1.0};
    CHECK_THAT(fit_constant(y, Tau(0.9)), Catch::Matchers::WithinAbs(0.9, 1e-10));
    CHECK_THAT(expectile_by_bisection(y, Tau(0.9)), Catch::Matchers::WithinAbs(0.9, 1e-10));
    CHECK_THAT(fit_constant(y, Tau(0.5)), Catch::Matchers::WithinAbs(0.5, 1e-12));

    const std::vector<double> flat{2.5, 2.5, 2.5};
    CHECK(fit_constant(flat, Tau(0.17)) == 2.5);
    CHECK(std::fabs(expectile_by_bisection(flat, Tau(0.17)) - 2.5) < 1e-12);
}

TEST_CASE("fit_constant equals the mean at tau one half") {
    Rng rng(5200);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 100.0);
        std::vector<double> y(n);
        double sum = 0.0;
        for (double& v : y) {
            v = rng.uniform(-5.0, 5.0);
            sum += v;
        }
        CHECK(std::fabs(fit_constant(y, Tau(0.5)) - sum / static_cast<double>(n)) < 1e-10);
    }
}

TEST_CASE("expectiles are monotone in tau") {
    Rng rng(5300);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform() * 50.0);
        std::vector<double> y(n);
        for (double& v : y) v = rng.uniform(-5.0, 5.0);
        double prev = fit_constant(y, Tau(0.05));
        for (double t : {0.2, 0.35, 0.5, 0.65, 0.8, 0.95}) {
            const double cur = fit_constant(y, Tau(t));
            CHECK(cur >= prev - 1e-12);
            prev = cur;
        }
    }
}

TEST_CASE("fit returns a feasible model with a recomputable risk") {
    Rng rng(5400);
    TrainConfig cfg;
    cfg.max_iters = 120;
    cfg.restarts = 2;
    cfg.seed = 11;
    for (int trial = 0; trial < 10; ++trial) {
        const SieveSpec sieve(3, 5.0, 6.0, 2);
        Dataset data;
        data.x = Matrix(40, 2);
        data.y.resize(40);
        for (double& v : data.x.data) v = rng.uniform();
        for (double& v : data.y) v = rng.uniform(-2.0, 2.0);
        const Tau tau(0.3 + 0.05 * trial);

        const FittedModel model = fit(data, tau, sieve, cfg);
        CHECK(in_sieve(model.params, sieve));
        CHECK(std::fabs(model.risk - empirical_risk(tau, model.params, data)) < 1e-12);
        CHECK(model.iterations <= cfg.max_iters);
        CHECK(model.restart_index < cfg.restarts);
    }
}

TEST_CASE("fit is deterministic") {
    const Dataset data = generate_dataset(TargetSpec::sine(1.0, 1.0),
                                          NoiseSpec::gaussian(0.1), 60, 1, 314);
    const SieveSpec sieve(3, 5.0, 8.0, 1);
    TrainConfig cfg;
    cfg.max_iters = 200;
    cfg.seed = 99;

    const FittedModel a = fit(data, Tau(0.5), sieve, cfg);
    const FittedModel b = fit(data, Tau(0.5), sieve, cfg);
    CHECK(a.risk == b.risk);
    CHECK(a.iterations == b.iterations);
    CHECK(a.restart_index == b.restart_index);
    CHECK(params_gap(a.params, b.params) == 0.0);
}

TEST_CASE("more restarts never increase the returned risk") {
    const Dataset data = generate_dataset(TargetSpec::sine(1.0, 1.0),
                                          NoiseSpec::gaussian(0.2), 80, 1, 2718);
    const SieveSpec sieve(4, 6.0, 10.0, 1);
    TrainConfig one;
    one.max_iters = 150;
    one.restarts = 1;
    one.seed = 5;
    TrainConfig five = one;
    five.restarts = 5;

    const FittedModel a = fit(data, Tau(0.5), sieve, one);
    const FittedModel b = fit(data, Tau(0.5), sieve, five);
    CHECK(b.risk <= a.risk);
}

TEST_CASE("noiseless realizable data is refit to tiny risk") {
    const EnnParams truth = sample_sieve(SieveSpec(2, 4.0, 3.0, 1), 424242);
    const Dataset data = generate_dataset(TargetSpec::feasible_enn(truth),
                                          NoiseSpec::none(), 200, 1, 515151);
    const SieveSpec sieve(4, 6.0, 8.0, 1);
    TrainConfig cfg;
    cfg.max_iters = 3000;
    cfg.restarts = 3;
    cfg.grad_tol = 1e-8;
    cfg.seed = 77;

    const FittedModel model = fit(data, Tau(0.5), sieve, cfg);
    CHECK(model.risk < 1e-4);
}

TEST_CASE("a vanishing hidden budget degenerates to the constant expectile") {
    Rng rng(5500);
    Dataset data;
    data.x = Matrix(50, 1);
    data.y.resize(50);
    for (double& v : data.x.data) v = rng.uniform();
    for (double& v : data.y) v = rng.uniform(-2.0, 2.0);
    const Tau tau(0.75);

    const SieveSpec sieve(3, 4.0, 1e-8, 1);
    TrainConfig cfg;
    cfg.max_iters = 4000;
    cfg.grad_tol = 1e-10;
    cfg.seed = 31;
    const FittedModel model = fit(data, tau, sieve, cfg);

    const double expectile = fit_constant(data.y, tau);
    const double probe[] = {0.37};
    CHECK_THAT(forward(model.params, probe), Catch::Matchers::WithinAbs(expectile, 1e-4));
}

TEST_CASE("fit input validation") {
    const SieveSpec sieve(2, 4.0, 3.0, 1);
    TrainConfig cfg;
    Dataset empty;
    empty.x = Matrix(0, 1);
    CHECK_THROWS_AS(fit(empty, Tau(0.5), sieve, cfg), std::invalid_argument);

    Dataset wrong;
    wrong.x = Matrix(5, 2);
    wrong.y.assign(5, 0.0);
    CHECK_THROWS_AS(fit(wrong, Tau(0.5), sieve, cfg), std::invalid_argument);

    TrainConfig bad;
    bad.step_size = 0.0;
    Dataset ok;
    ok.x = Matrix(5, 1);
    ok.y.assign(5, 0.0);
    CHECK_THROWS_AS(fit(ok, Tau(0.5), sieve, bad), std::invalid_argument);
}

TEST_CASE("empirical norm golden value") {
    EnnParams p(1, 1);
    p.output_bias = 0.0;
    Matrix x(2, 1);
    x(0, 0) = 0.1;
    x(1, 0) = 0.9;
    int call = 0;
    const auto reference = [&call](std::span<const double>) {
        return (call++ == 0) ? -3.0 : -4.0;
    };
    CHECK_THAT(empirical_norm(p, reference, x),
               Catch::Matchers::WithinAbs(std::sqrt(25.0 / 2.0), 1e-12));
}
