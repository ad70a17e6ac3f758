#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <vector>

#include "mgvol/game_config.hpp"
#include "mgvol/matrix.hpp"
#include "mgvol/stats.hpp"
#include "mgvol/strategy.hpp"

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

GameConfig gcmg_config(int n_s, int n_p, int p, double w = 1.0, std::uint64_t seed = 42) {
    GameConfig cfg;
    cfg.kind = GameKind::gcmg;
    cfg.n = n_s + n_p;
    cfg.n_speculators = n_s;
    cfg.n_producers = n_p;
    cfg.p = p;
    cfg.w = w;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("smallest MG instance has the forced value sets", "[strategy]") {
    const auto table = generate_strategies(mg_config(1, 1));
    REQUIRE(table.a.size() == 2);
    for (double a : table.a) REQUIRE((a == 1.0 || a == -1.0));
    const double xi = table.xi_at(0, 0);
    REQUIRE((xi == -1.0 || xi == 0.0 || xi == 1.0));
}

TEST_CASE("strategy draws are balanced (law of large numbers)", "[strategy]") {
    const int n = 1000, p = 64;
    const auto table = generate_strategies(mg_config(n, p));
    double sum = 0.0;
    for (double a : table.a) sum += a;
    const double cells = static_cast<double>(n) * 2.0 * p;
    REQUIRE(std::abs(sum / cells) <= 3.0 / std::sqrt(cells));
}

TEST_CASE("GCMG tables have one strategy row per agent", "[strategy]") {
    const auto table = generate_strategies(gcmg_config(2, 2, 2, 2.0));
    REQUIRE(table.s == 1);
    REQUIRE(table.a.size() == 4 * 1 * 2);
    for (double a : table.a) REQUIRE((a == 2.0 || a == -2.0));
    REQUIRE(table.xi.empty());
}

TEST_CASE("identical seeds give bitwise-identical tables", "[strategy]") {
    const auto cfg = mg_config(17, 23, 0.5, 99);
    const auto t1 = generate_strategies(cfg);
    const auto t2 = generate_strategies(cfg);
    REQUIRE(t1.a == t2.a);
    REQUIRE(t1.xi == t2.xi);
    REQUIRE(t1.theta == t2.theta);

    auto other = cfg;
    other.seed = 100;
    REQUIRE(generate_strategies(other).a != t1.a);
}

TEST_CASE("xi and theta follow from the raw table", "[strategy]") {
    const auto cfg = mg_config(7, 5, 2.0);
    const auto table = generate_strategies(cfg);
    for (int mu = 0; mu < cfg.p; ++mu) {
        double theta = 0.0;
        for (int i = 0; i < cfg.n; ++i) {
            REQUIRE(table.xi_at(i, mu) == 0.5 * (table.at(i, 0, mu) - table.at(i, 1, mu)));
            theta += 0.5 * (table.at(i, 0, mu) + table.at(i, 1, mu));
        }
        REQUIRE(table.theta[static_cast<std::size_t>(mu)] == theta);
    }
}

TEST_CASE("generation rejects degenerate sizes", "[strategy]") {
    auto cfg = mg_config(0, 4);
    REQUIRE_THROWS_AS(generate_strategies(cfg), std::invalid_argument);
    cfg = mg_config(4, 0);
    REQUIRE_THROWS_AS(generate_strategies(cfg), std::invalid_argument);
}

TEST_CASE("identical strategy pairs zero out the reduced variables", "[reduced]") {
    const auto cfg = mg_config(3, 4);
    StrategyTable table;
    table.n = 3;
    table.s = 2;
    table.p = 4;
    table.w = 1.0;
    table.a.resize(3 * 2 * 4);
    Rng rng(7);
    for (int i = 0; i < 3; ++i)
        for (int mu = 0; mu < 4; ++mu) {
            const double v = rng.sign(1.0);
            table.a[(static_cast<std::size_t>(i) * 2 + 0) * 4 + static_cast<std::size_t>(mu)] = v;
            table.a[(static_cast<std::size_t>(i) * 2 + 1) * 4 + static_cast<std::size_t>(mu)] = v;
        }
    table.xi.assign(3 * 4, 0.0);
    table.theta.assign(4, 0.0);
    for (int i = 0; i < 3; ++i)
        for (int mu = 0; mu < 4; ++mu)
            table.theta[static_cast<std::size_t>(mu)] += table.at(i, 0, mu);

    const auto rs = reduced_stats(table, cfg);
    for (int i = 0; i < 3; ++i) {
        REQUIRE(rs.xi_theta[static_cast<std::size_t>(i)] == 0.0);
        for (int j = 0; j < 3; ++j) REQUIRE(rs.xi_xi(i, j) == 0.0);
    }
}

TEST_CASE("reduced stats match a hand computation on N=2, P=2", "[reduced]") {
    // agent 0: a+ = (+1,-1), a- = (+1,+1)  -> xi_0 = (0,-1)
    // agent 1: a+ = (-1,-1), a- = (+1,-1)  -> xi_1 = (-1,0)
    // theta = (1,-1)
    StrategyTable table;
    table.n = 2;
    table.s = 2;
    table.p = 2;
    table.w = 1.0;
    table.a = {1, -1, 1, 1, -1, -1, 1, -1};
    table.xi = {0, -1, -1, 0};
    table.theta = {1, -1};

    const auto rs = reduced_stats(table, mg_config(2, 2));
    // xi_xi = (1/2) sum_mu xi_i xi_j
    REQUIRE(rs.xi_xi(0, 0) == 0.5);
    REQUIRE(rs.xi_xi(1, 1) == 0.5);
    REQUIRE(rs.xi_xi(0, 1) == 0.0);
    REQUIRE(rs.xi_xi(1, 0) == 0.0);
    // xi_theta_0 = (0*1 + (-1)(-1))/2, xi_theta_1 = ((-1)*1 + 0)/2
    REQUIRE(rs.xi_theta[0] == 0.5);
    REQUIRE(rs.xi_theta[1] == -0.5);
}

TEST_CASE("reduced stats reject shape mismatches", "[reduced]") {
    const auto table = generate_strategies(mg_config(4, 4));
    REQUIRE_THROWS_AS(reduced_stats(table, mg_config(5, 4)), std::invalid_argument);
}

TEST_CASE("off-diagonal strategy overlaps vanish at the w^2/sqrt(P) rate", "[reduced]") {
    const double w = 1.5;
    const int n = 40, p = 4096;
    const auto cfg = mg_config(n, p, w, 11);
    const auto table = generate_strategies(cfg);
    const auto rs = reduced_stats(table, cfg);
    double rms = 0.0;
    int pairs = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < i; ++j) {
            rms += rs.xi_xi(i, j) * rs.xi_xi(i, j);
            ++pairs;
        }
    rms = std::sqrt(rms / pairs);
    // per-entry sd is w^2 / (2 sqrt(P)); allow a factor-2 statistical band
    REQUIRE(rms <= w * w / std::sqrt(static_cast<double>(p)));
    REQUIRE(rms >= 0.25 * w * w / std::sqrt(static_cast<double>(p)));
}

TEST_CASE("diagonal overlap expectation is w^2/2 across seeds", "[reduced]") {
    const double w = 2.0;
    const int n = 8, p = 64, tables = 120;
    std::vector<double> means;
    means.reserve(tables);
    for (int k = 0; k < tables; ++k) {
        auto cfg = mg_config(n, p, w, 1000 + static_cast<std::uint64_t>(k));
        const auto rs = reduced_stats(generate_strategies(cfg), cfg);
        double diag = 0.0;
        for (int i = 0; i < n; ++i) {
            REQUIRE(rs.xi_xi(i, i) >= 0.0);
            REQUIRE(rs.xi_xi(i, i) <= w * w);
            diag += rs.xi_xi(i, i);
        }
        means.push_back(diag / n);
    }
    const double m = mean(means);
    const double se = standard_error(means);
    REQUIRE(std::abs(m - w * w / 2.0) <= 5.0 * se);
}

TEST_CASE("xi_xi factorizes as a PSD matrix with tiny jitter", "[reduced][matrix]") {
    const auto cfg = mg_config(30, 16, 1.0, 5);  // rank-deficient: P < N
    const auto rs = reduced_stats(generate_strategies(cfg), cfg);
    const Matrix l = cholesky_psd(rs.xi_xi, 1e-10);
    REQUIRE(mat_mul_transposed(l).max_abs_diff(rs.xi_xi) <= 1e-8);
}

TEST_CASE("cholesky_psd handles the zero matrix and rejects indefinite input", "[matrix]") {
    const Matrix zero(4);
    const Matrix l = cholesky_psd(zero);
    REQUIRE(mat_mul_transposed(l).max_abs_diff(zero) == 0.0);

    Matrix bad(2);
    bad(0, 0) = 1.0;
    bad(1, 1) = 1.0;
    bad(0, 1) = bad(1, 0) = 2.0;  // eigenvalues 3 and -1
    REQUIRE_THROWS_AS(cholesky_psd(bad), std::runtime_error);
}

TEST_CASE("config validation enforces the documented invariants", "[config]") {
    GameConfig cfg = mg_config(10, 5);
    REQUIRE_NOTHROW(cfg.validate());
    REQUIRE(cfg.alpha() == 0.5);

    cfg.gamma = 0.0;
    REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.gamma = 1.0;
    cfg.w = -1.0;
    REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);

    GameConfig g = gcmg_config(3, 2, 4);
    REQUIRE_NOTHROW(g.validate());
    REQUIRE(g.spec_fraction() == 0.75);
    REQUIRE(g.prod_fraction() == 0.5);
    REQUIRE(g.alpha_ns() == Catch::Approx(1.0 / 1.25));
    REQUIRE(g.liquidity_l() == 12);
    g.n_producers = 3;
    REQUIRE_THROWS_AS(g.validate(), std::invalid_argument);
}

TEST_CASE("config files round trip, accept m = log2(P), and apply defaults", "[config]") {
    GameConfig cfg = gcmg_config(63, 127, 127, 0.5, 7);
    cfg.epsilon = 0.01;
    const std::string text = serialize_game_config(cfg);
    std::istringstream in(text);
    const GameConfig back = parse_game_config(in);
    REQUIRE(back.kind == cfg.kind);
    REQUIRE(back.n == cfg.n);
    REQUIRE(back.p == cfg.p);
    REQUIRE(back.w == cfg.w);
    REQUIRE(back.epsilon == cfg.epsilon);
    REQUIRE(back.n_speculators == cfg.n_speculators);
    REQUIRE(back.seed == cfg.seed);

    std::istringstream via_m("kind = mg\nn = 10\nm = 5\nseed = 3\n");
    const GameConfig from_m = parse_game_config(via_m);
    REQUIRE(from_m.p == 32);
    REQUIRE(from_m.m.value() == 5);
    REQUIRE(from_m.gamma == 1.0);  // documented defaults
    REQUIRE(from_m.w == 1.0);

    std::istringstream conflicting("kind = mg\nn = 10\nm = 5\np = 33\n");
    REQUIRE_THROWS_AS(parse_game_config(conflicting), std::invalid_argument);

    std::istringstream junk("kind = mg\nn = ten\n");
    REQUIRE_THROWS_AS(parse_game_config(junk), std::invalid_argument);

    std::istringstream unknown("kind = mg\nn = 10\np = 4\nbogus = 1\n");
    REQUIRE_THROWS_AS(parse_game_config(unknown), std::invalid_argument);
}
