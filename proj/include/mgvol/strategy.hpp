#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "mgvol/game_config.hpp"
#include "mgvol/matrix.hpp"
#include "mgvol/rng.hpp"

namespace mgvol {

// Quenched strategies a[i][s][mu] in {-w, +w}, drawn once and kept fixed.
// For the two-strategy game the reduced variables
//   xi_i^mu    = (a_{+,i}^mu - a_{-,i}^mu) / 2
//   theta^mu   = sum_i (a_{+,i}^mu + a_{-,i}^mu) / 2
// are precomputed; the single-strategy game leaves them empty.
struct StrategyTable {
    int n = 0;
    int s = 0;
    int p = 0;
    double w = 1.0;
    std::vector<double> a;      // [i][s][mu], innermost mu
    std::vector<double> xi;     // [i][mu], two-strategy game only
    std::vector<double> theta;  // [mu], two-strategy game only

    double at(int i, int si, int mu) const {
        return a[(static_cast<std::size_t>(i) * static_cast<std::size_t>(s) + static_cast<std::size_t>(si)) *
                     static_cast<std::size_t>(p) +
                 static_cast<std::size_t>(mu)];
    }
    double xi_at(int i, int mu) const {
        return xi[static_cast<std::size_t>(i) * static_cast<std::size_t>(p) + static_cast<std::size_t>(mu)];
    }
};

// Draws every entry as an independent fair pick from {-w, +w} using the
// strategy substream of the config's seed. Identical (config, seed) yields
// identical tables.
inline StrategyTable generate_strategies(const GameConfig& config) {
    config.validate();
    StrategyTable t;
    t.n = config.n;
    t.s = config.strategies_per_agent();
    t.p = config.p;
    t.w = config.w;

    Rng rng = RngStreams(config.seed).strategies;
    const std::size_t cells = static_cast<std::size_t>(t.n) * static_cast<std::size_t>(t.s) *
                              static_cast<std::size_t>(t.p);
    t.a.resize(cells);
    for (std::size_t k = 0; k < cells; ++k) t.a[k] = rng.sign(config.w);

    if (t.s == 2) {
        t.xi.resize(static_cast<std::size_t>(t.n) * static_cast<std::size_t>(t.p));
        t.theta.assign(static_cast<std::size_t>(t.p), 0.0);
        for (int i = 0; i < t.n; ++i)
            for (int mu = 0; mu < t.p; ++mu) {
                const double plus = t.at(i, 0, mu);
                const double minus = t.at(i, 1, mu);
                t.xi[static_cast<std::size_t>(i) * static_cast<std::size_t>(t.p) +
                     static_cast<std::size_t>(mu)] = 0.5 * (plus - minus);
                t.theta[static_cast<std::size_t>(mu)] += 0.5 * (plus + minus);
            }
    }
    return t;
}

// Exact finite-P averages of the reduced variables. xi_xi is (1/P) times the
// Gram matrix of the xi vectors, so it is symmetric positive semidefinite by
// construction; a_a is the single-strategy analogue.
struct ReducedStats {
    std::vector<double> xi_theta;  // (1/P) sum_mu xi_i^mu theta^mu
    Matrix xi_xi;                  // (1/P) sum_mu xi_i^mu xi_j^mu
    Matrix a_a;                    // (1/P) sum_mu a_i^mu a_j^mu
};

inline ReducedStats reduced_stats(const StrategyTable& table, const GameConfig& config) {
    if (table.n != config.n || table.p != config.p || table.s != config.strategies_per_agent())
        throw std::invalid_argument("reduced_stats: table shape does not match config");

    ReducedStats rs;
    const int n = table.n;
    const int p = table.p;
    const double inv_p = 1.0 / static_cast<double>(p);

    if (table.s == 2) {
        rs.xi_theta.assign(static_cast<std::size_t>(n), 0.0);
        rs.xi_xi = Matrix(n);
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int mu = 0; mu < p; ++mu) acc += table.xi_at(i, mu) * table.theta[static_cast<std::size_t>(mu)];
            rs.xi_theta[static_cast<std::size_t>(i)] = acc * inv_p;
            for (int j = 0; j <= i; ++j) {
                double g = 0.0;
                for (int mu = 0; mu < p; ++mu) g += table.xi_at(i, mu) * table.xi_at(j, mu);
                rs.xi_xi(i, j) = g * inv_p;
                rs.xi_xi(j, i) = rs.xi_xi(i, j);
            }
        }
    } else {
        rs.a_a = Matrix(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j <= i; ++j) {
                double g = 0.0;
                for (int mu = 0; mu < p; ++mu) g += table.at(i, 0, mu) * table.at(j, 0, mu);
                rs.a_a(i, j) = g * inv_p;
                rs.a_a(j, i) = rs.a_a(i, j);
            }
    }
    return rs;
}

}  // namespace mgvol
