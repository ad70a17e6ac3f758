#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "mgvol/mg_engine.hpp"
#include "mgvol/price_path.hpp"
#include "mgvol/stats.hpp"

using namespace mgvol;

namespace {

GameConfig mg_config(int n, int p, double w = 1.0, std::uint64_t seed = 42) {
    GameConfig cfg;
    cfg.kind = GameKind::mg;
    cfg.n = n;
    cfg.p = p;
    cfg.w = w;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("zero attendance keeps the price constant", "[path]") {
    const auto cfg = mg_config(4, 2);
    const std::vector<double> b(50, 0.0);
    const PricePath path = price_path_discrete(b, cfg, 123.0);
    for (double lp : path.log_price) REQUIRE(lp == std::log(123.0));
}

TEST_CASE("maximal attendance grows log price by one per step", "[path]") {
    const auto cfg = mg_config(5, 2, 2.0);
    const std::vector<double> b(10, 5.0 * 2.0);  // B = N w
    const PricePath path = price_path_discrete(b, cfg, 1.0);
    for (std::size_t t = 0; t < path.log_price.size(); ++t)
        REQUIRE(path.log_price[t] == Catch::Approx(static_cast<double>(t)).margin(1e-12));
}

TEST_CASE("terminal log return equals the attendance sum", "[path]") {
    const auto cfg = mg_config(25, 32, 1.0, 8);
    const auto table = generate_strategies(cfg);
    const auto run = run_mg(cfg, table, 0, 1000);
    const PricePath path = price_path_discrete(run.state.attendance_history, cfg, 100.0);

    double total = 0.0;
    for (double b : run.state.attendance_history) total += b;
    const double expected = total / (cfg.n * cfg.w);
    REQUIRE(std::abs((path.log_price.back() - path.log_price.front()) - expected) <= 1e-12);
}

TEST_CASE("a frozen y path keeps the continuum price constant", "[path]") {
    const auto cfg = mg_config(3, 4, 1.0, 5);
    const auto table = generate_strategies(cfg);
    const auto spec = make_sde_spec(cfg, reduced_stats(table, cfg), 1.0);

    YPath y;
    y.dt = 0.1;
    y.y.assign(6, std::vector<double>(3, 0.25));  // constant y
    const std::vector<int> mu = {0, 1, 2, 3, 0};
    const PricePath path = price_path_continuum(spec, y, mu, table, 50.0);
    for (double lp : path.log_price) REQUIRE(lp == std::log(50.0));
}

TEST_CASE("one continuum step matches hand arithmetic", "[path]") {
    const auto cfg = mg_config(2, 2, 1.0, 6);
    auto table = generate_strategies(cfg);
    // pin xi by hand
    table.xi = {0.5, -1.0, 1.0, 0.0};  // xi[i][mu]

    SdeSpec spec;
    spec.kind = GameKind::mg;
    spec.n = 2;
    spec.gamma = 2.0;
    spec.w = 1.0;
    spec.control = 0.7;  // alpha
    spec.sigma2_n = 1.0;
    spec.xi_theta = {0.0, 0.0};
    spec.coupling = Matrix(2);
    spec.coupling(0, 0) = spec.coupling(1, 1) = 1.0;

    YPath y;
    y.dt = 0.05;
    y.y = {{0.0, 0.0}, {0.2, -0.3}};
    const std::vector<int> mu = {1};

    const PricePath path = price_path_continuum(spec, y, mu, table, 1.0);
    // increment = -(2 alpha / (w^3 Gamma)) (1/N) (xi_0^1 dy_0 + xi_1^1 dy_1)
    const double expected = -(2.0 * 0.7 / 2.0) * 0.5 * ((-1.0) * 0.2 + 0.0 * (-0.3));
    REQUIRE(path.log_price.back() == Catch::Approx(expected).margin(1e-15));
    REQUIRE(path.times.back() == Catch::Approx(0.05 / 2.0));  // price time = y time / Gamma
    REQUIRE(path.y_terminal == y.y.back());
}

TEST_CASE("continuum terminal variance reproduces alpha sigma2 t / (w^2 N^2)", "[path][mc][slow]") {
    const int n = 16, p = 256;
    const auto cfg = mg_config(n, p, 1.0, 12);
    const auto table = generate_strategies(cfg);
    const auto rs = reduced_stats(table, cfg);
    const double sigma2_n = 0.8 * n;  // frozen coefficient of the test spec
    const auto spec = make_sde_spec(cfg, rs, sigma2_n);
    const SdeIntegrator sde(spec);

    const double dt = 0.05;                  // y-clock step
    const long long steps = 100;
    const double horizon_price = steps * dt / cfg.gamma;
    const double expected_var =
        cfg.alpha() * sigma2_n * horizon_price / (cfg.w * cfg.w * n * n);

    Rng wiener(31);
    Rng mu_rng(32);
    const std::vector<double> y0(n, 0.0);
    const int replicas = 4000;
    std::vector<double> terminal;
    terminal.reserve(replicas);
    for (int k = 0; k < replicas; ++k) {
        const YPath y = sde.integrate(y0, steps * dt, dt, wiener);
        std::vector<int> mu_seq(steps);
        for (auto& mu : mu_seq) mu = static_cast<int>(mu_rng.uniform_below(p));
        const PricePath path = price_path_continuum(spec, y, mu_seq, table, 1.0);
        terminal.push_back(path.log_price.back());
    }
    const double var = sample_variance(terminal);
    const double se = var * std::sqrt(2.0 / (replicas - 1));
    REQUIRE(std::abs(var - expected_var) <= 5.0 * se);
}

TEST_CASE("continuum path rejects mismatched grids", "[path]") {
    const auto cfg = mg_config(2, 2, 1.0, 6);
    const auto table = generate_strategies(cfg);
    const auto spec = make_sde_spec(cfg, reduced_stats(table, cfg), 1.0);
    YPath y;
    y.dt = 0.1;
    y.y = {{0.0, 0.0}, {0.1, 0.1}};
    const std::vector<int> mu = {0, 1};  // one too many
    REQUIRE_THROWS_AS(price_path_continuum(spec, y, mu, table, 1.0), std::invalid_argument);
}

TEST_CASE("zero-variance terminal sampling is the deterministic forward", "[terminal]") {
    Rng rng(3);
    const auto samples = risk_neutral_terminal(100.0, 0.03, 2.0, 0.0, 10, rng);
    for (double s : samples) REQUIRE(s == Catch::Approx(100.0 * std::exp(0.06)).margin(1e-12));
}

TEST_CASE("discounted terminal mean is the spot (martingale)", "[terminal][mc]") {
    Rng rng(17);
    const double p_t = 80.0, r = 0.05, theta = 1.5, nu = 0.09;
    const int n = 200000;
    const auto samples = risk_neutral_terminal(p_t, r, theta, nu, n, rng);
    std::vector<double> discounted(samples.size());
    const double df = std::exp(-r * theta);
    for (std::size_t k = 0; k < samples.size(); ++k) discounted[k] = df * samples[k];
    const double m = mean(discounted);
    const double se = standard_error(discounted);
    REQUIRE(std::abs(m - p_t) <= 4.0 * se);
}

TEST_CASE("terminal log variance equals nu theta", "[terminal][mc]") {
    Rng rng(23);
    const double nu = 0.04, theta = 0.7;
    const auto samples = risk_neutral_terminal(50.0, 0.01, theta, nu, 100000, rng);
    std::vector<double> logs(samples.size());
    for (std::size_t k = 0; k < samples.size(); ++k) logs[k] = std::log(samples[k]);
    const double var = sample_variance(logs);
    const double se = var * std::sqrt(2.0 / (samples.size() - 1.0));
    REQUIRE(std::abs(var - nu * theta) <= 4.0 * se);
}

TEST_CASE("terminal sampler validates inputs", "[terminal]") {
    Rng rng(1);
    REQUIRE_THROWS_AS(risk_neutral_terminal(1.0, 0.0, 1.0, -0.1, 10, rng), std::invalid_argument);
    REQUIRE_THROWS_AS(risk_neutral_terminal(-1.0, 0.0, 1.0, 0.1, 10, rng), std::invalid_argument);
    REQUIRE_THROWS_AS(risk_neutral_terminal(1.0, 0.0, 0.0, 0.1, 10, rng), std::invalid_argument);
}

TEST_CASE("discrete and risk-neutral terminal variances agree", "[path][mc][slow]") {
    // asymmetric phase at w = 1; theta maps through nu theta = sigma2 T / N^2
    const auto base = mg_config(25, 200, 1.0, 41);
    const long long burn = default_burn_in(base);
    const long long t_steps = 25;

    // long independent run pins sigma2_N
    const auto sigma_cfg = base;
    const auto sigma = estimate_sigma(sigma_cfg, generate_strategies(sigma_cfg), burn,
                                      default_measure(sigma_cfg));

    const int n_seeds = 400;
    std::vector<double> terminal;
    terminal.reserve(n_seeds);
    for (int k = 0; k < n_seeds; ++k) {
        auto cfg = base;
        cfg.seed = mix_seed(base.seed, 1000 + static_cast<std::uint64_t>(k));
        const auto table = generate_strategies(cfg);
        const auto run = run_mg(cfg, table, burn, t_steps);
        std::vector<double> measured(run.state.attendance_history.end() - t_steps,
                                     run.state.attendance_history.end());
        const PricePath path = price_path_discrete(measured, cfg, 100.0);
        terminal.push_back(path.log_price.back() - path.log_price.front());
    }
    const double var_discrete = sample_variance(terminal);
    const double se_discrete = var_discrete * std::sqrt(2.0 / (n_seeds - 1));

    const double nu = base.alpha() * sigma.sigma2_n / (base.w * base.w * base.n * base.n);
    const double theta = static_cast<double>(t_steps) / base.alpha();
    Rng rng(55);
    const auto samples = risk_neutral_terminal(100.0, 0.0, theta, nu, 100000, rng);
    std::vector<double> logs(samples.size());
    for (std::size_t k = 0; k < samples.size(); ++k) logs[k] = std::log(samples[k]);
    const double var_rn = sample_variance(logs);
    const double se_rn = var_rn * std::sqrt(2.0 / (samples.size() - 1.0));

    const double se_sigma = sigma.stderr_ / sigma.sigma2_n * var_rn;  // sigma2 uncertainty
    const double combined = std::sqrt(se_discrete * se_discrete + se_rn * se_rn +
                                      se_sigma * se_sigma);
    REQUIRE(std::abs(var_discrete - var_rn) <= 3.0 * combined);
}
