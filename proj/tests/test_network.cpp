#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "enn/network.hpp"
#include "enn/rng.hpp"
#include "enn/sieve.hpp"
#include "enn/targets.hpp"

using namespace enn;

namespace {

std::vector<double*> flatten(EnnParams& p) {
    std::vector<double*> out;
    out.push_back(&p.output_bias);
    for (double& v : p.output_weights) out.push_back(&v);
    for (double& v : p.hidden_biases) out.push_back(&v);
    for (double& v : p.hidden_weights.data) out.push_back(&v);
    return out;
}

std::vector<double> flatten_values(const EnnParams& p) {
    EnnParams& q = const_cast<EnnParams&>(p);
    std::vector<double> out;
    for (double* v : flatten(q)) out.push_back(*v);
    return out;
}

Dataset random_dataset(Rng& rng, std::size_t n, std::size_t d) {
    Dataset data;
    data.x = Matrix(n, d);
    data.y.resize(n);
    for (double& v : data.x.data) v = rng.uniform(-1.0, 1.0);
    for (double& v : data.y) v = rng.uniform(-2.0, 2.0);
    return data;
}

EnnParams random_params(Rng& rng, int r, int d) {
    EnnParams p(r, d);
    p.output_bias = rng.uniform(-1.0, 1.0);
    for (double& v : p.output_weights) v = rng.uniform(-1.0, 1.0);
    for (double& v : p.hidden_biases) v = rng.uniform(-1.0, 1.0);
    for (double& v : p.hidden_weights.data) v = rng.uniform(-1.0, 1.0);
    return p;
}

}  // namespace

TEST_CASE("sigmoid values and stability") {
    CHECK(sigmoid(0.0) == 0.5);
    CHECK_THAT(sigmoid(1.0), Catch::Matchers::WithinAbs(0.7310585786300049, 1e-12));
    CHECK_THAT(sigmoid(-1.0), Catch::Matchers::WithinAbs(1.0 - 0.7310585786300049, 1e-12));
    CHECK(std::isfinite(sigmoid(800.0)));
    CHECK(std::isfinite(sigmoid(-800.0)));
    CHECK(sigmoid(800.0) <= 1.0);
    CHECK(sigmoid(-800.0) >= 0.0);
    CHECK(sigmoid(40.0) > sigmoid(-40.0));
}

TEST_CASE("expectile loss basics") {
    const Tau half(0.5);
    Rng rng(7001);
    for (int i = 0; i < 200; ++i) {
        const double y = rng.uniform(-5.0, 5.0);
        const double f = rng.uniform(-5.0, 5.0);
        CHECK(expectile_loss(half, y, f) ==
              Catch::Approx(0.5 * (y - f) * (y - f)).margin(1e-15));
        CHECK(expectile_loss(half, y, y) == 0.0);
        CHECK(expectile_loss(Tau(0.3), y, f) >= 0.0);
    }
}

TEST_CASE("expectile weight symmetry: loss(tau, y, f) = loss(1-tau, 2f-y, f)") {
    Rng rng(7002);
    for (int i = 0; i < 500; ++i) {
        const double t = rng.uniform(0.01, 0.99);
        const double y = rng.uniform(-5.0, 5.0);
        const double f = rng.uniform(-5.0, 5.0);
        CHECK(expectile_loss(Tau(t), y, f) ==
              Catch::Approx(expectile_loss(Tau(1.0 - t), 2.0 * f - y, f)).margin(1e-12));
    }
}

TEST_CASE("loss derivative matches finite differences off the kink") {
    Rng rng(7003);
    for (int i = 0; i < 200; ++i) {
        const Tau tau(rng.uniform(0.05, 0.95));
        const double y = rng.uniform(-3.0, 3.0);
        double f = rng.uniform(-3.0, 3.0);
        if (std::fabs(y - f) < 1e-3) f += 0.01;
        const double h = 1e-6;
        const double fd =
            (expectile_loss(tau, y, f + h) - expectile_loss(tau, y, f - h)) / (2.0 * h);
        CHECK_THAT(expectile_loss_df(tau, y, f), Catch::Matchers::WithinAbs(fd, 1e-6));
    }
}

TEST_CASE("analytic gradient matches central finite differences") {
    Rng rng(7004);
    for (int trial = 0; trial < 10; ++trial) {
        const int d = 1 + static_cast<int>(rng.uniform() * 3.0);
        const int r = 1 + static_cast<int>(rng.uniform() * 4.0);
        const std::size_t n = 5 + static_cast<std::size_t>(rng.uniform() * 20.0);
        const Tau tau(rng.uniform(0.1, 0.9));
        const Dataset data = random_dataset(rng, n, static_cast<std::size_t>(d));
        EnnParams params = random_params(rng, r, d);

        const EnnParams grad = empirical_risk_grad(tau, params, data);
        const std::vector<double> analytic = flatten_values(grad);
        const auto coords = flatten(params);
        const double h = 1e-5;
        for (std::size_t k = 0; k < coords.size(); ++k) {
            const double saved = *coords[k];
            *coords[k] = saved + h;
            const double up = empirical_risk(tau, params, data);
            *coords[k] = saved - h;
            const double down = empirical_risk(tau, params, data);
            *coords[k] = saved;
            const double fd = (up - down) / (2.0 * h);
            const double scale = std::max({1.0, std::fabs(fd), std::fabs(analytic[k])});
            CHECK(std::fabs(analytic[k] - fd) / scale < 1e-5);
        }
    }
}

TEST_CASE("perfect fit has zero gradient") {
    Rng rng(7005);
    EnnParams params = random_params(rng, 3, 2);
    Dataset data = random_dataset(rng, 40, 2);
    for (std::size_t i = 0; i < data.size(); ++i) data.y[i] = forward(params, data.x.row(i));
    const EnnParams grad = empirical_risk_grad(Tau(0.7), params, data);
    for (double g : flatten_values(grad)) CHECK(std::fabs(g) < 1e-14);
}

TEST_CASE("forward bounded by the output budget on the sieve") {
    Rng rng(7006);
    for (int trial = 0; trial < 50; ++trial) {
        const SieveSpec sieve(1 + trial % 6, 4.0 + trial % 5, 0.5 + trial, 1 + trial % 3);
        const EnnParams p = sample_sieve(sieve, 900 + trial);
        REQUIRE(in_sieve(p, sieve));
        for (int pt = 0; pt < 20; ++pt) {
            std::vector<double> x(sieve.input_dim);
            for (double& v : x) v = rng.uniform(-50.0, 50.0);
            CHECK(std::fabs(forward(p, x)) <= sieve.output_budget);
        }
    }
}

TEST_CASE("risk split sums to the undecomposed risk") {
    Rng rng(7007);
    for (int trial = 0; trial < 50; ++trial) {
        const Dataset data = random_dataset(rng, 30, 2);
        const EnnParams p = random_params(rng, 4, 2);
        const Tau tau(rng.uniform(0.05, 0.95));
        const RiskSplit split = empirical_risk_split(p, data);
        CHECK(std::fabs(split.combine(tau) - empirical_risk(tau, p, data)) < 1e-12);
        CHECK(split.positive_part >= 0.0);
        CHECK(split.negative_part >= 0.0);
    }
}

TEST_CASE("constant-only model gradient in the bias") {
    const Tau tau(0.3);
    Dataset data;
    data.x = Matrix(4, 1);
    data.y = {1.0, -2.0, 0.5, 3.0};
    for (std::size_t i = 0; i < 4; ++i) data.x(i, 0) = 0.25 * static_cast<double>(i);
    EnnParams p(2, 1);
    p.output_bias = 0.4;

    double expected = 0.0;
    for (double y : data.y) {
        const double w = (y >= p.output_bias) ? tau.value() : 1.0 - tau.value();
        expected += 2.0 * w * (p.output_bias - y);
    }
    expected /= static_cast<double>(data.size());

    const EnnParams grad = empirical_risk_grad(tau, p, data);
    CHECK_THAT(grad.output_bias, Catch::Matchers::WithinAbs(expected, 1e-14));
}
