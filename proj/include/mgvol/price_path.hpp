#pragma once

#include <cmath>
#include <fstream>
#include <span>
#include <stdexcept>
#include <vector>

#include "mgvol/game_config.hpp"
#include "mgvol/rng.hpp"
#include "mgvol/sde.hpp"
#include "mgvol/strategy.hpp"

namespace mgvol {

enum class PathMode { discrete_attendance, continuum, risk_neutral_terminal };

struct PricePath {
    PathMode mode = PathMode::discrete_attendance;
    std::vector<double> times;
    std::vector<double> log_price;
    std::vector<double> y_terminal;  // optional snapshot (continuum mode)
};

// Excess-demand price map: log p(t+1) = log p(t) + B(t) / (N w).
inline PricePath price_path_discrete(std::span<const double> attendance, const GameConfig& config,
                                     double p0) {
    if (!(p0 > 0.0)) throw std::invalid_argument("price_path_discrete: p0 must be positive");
    PricePath path;
    path.mode = PathMode::discrete_attendance;
    path.times.reserve(attendance.size() + 1);
    path.log_price.reserve(attendance.size() + 1);
    path.times.push_back(0.0);
    path.log_price.push_back(std::log(p0));
    const double inv = 1.0 / (static_cast<double>(config.n) * config.w);
    for (std::size_t t = 0; t < attendance.size(); ++t) {
        path.times.push_back(static_cast<double>(t + 1));
        path.log_price.push_back(path.log_price.back() + attendance[t] * inv);
    }
    return path;
}

// Price path recovered from the continuum score dynamics. Per step,
//   mg:    dlog p = -(2 alpha / (w^3 Gamma)) (1/N) sum_i xi_i^mu dy_i
//   gcmg:  dlog p = -(1 / (w^3 Gamma (n_s+n_p))) (1/N) sum_i a_i^mu dy_i
// with mu resampled each step. The y grid advances on the Gamma t clock, so
// price time is y-time / Gamma.
inline PricePath price_path_continuum(const SdeSpec& spec, const YPath& y_path,
                                      std::span<const int> mu_seq, const StrategyTable& table,
                                      double p0) {
    if (!(p0 > 0.0)) throw std::invalid_argument("price_path_continuum: p0 must be positive");
    if (mu_seq.size() != y_path.steps())
        throw std::invalid_argument("price_path_continuum: mu sequence does not match the y grid");
    if (table.n != spec.n) throw std::invalid_argument("price_path_continuum: table/spec mismatch");

    const int n = spec.n;
    const double factor = spec.kind == GameKind::mg
                              ? -2.0 * spec.control / (spec.w * spec.w * spec.w * spec.gamma)
                              : -spec.control / (spec.w * spec.w * spec.w * spec.gamma);
    const double price_dt = y_path.dt / spec.gamma;

    PricePath path;
    path.mode = PathMode::continuum;
    path.times.reserve(y_path.y.size());
    path.log_price.reserve(y_path.y.size());
    path.times.push_back(0.0);
    path.log_price.push_back(std::log(p0));
    for (std::size_t k = 0; k < mu_seq.size(); ++k) {
        const int mu = mu_seq[k];
        if (mu < 0 || mu >= table.p) throw std::invalid_argument("price_path_continuum: mu out of range");
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            const double base = spec.kind == GameKind::mg ? table.xi_at(i, mu) : table.at(i, 0, mu);
            s += base * (y_path.y[k + 1][static_cast<std::size_t>(i)] -
                         y_path.y[k][static_cast<std::size_t>(i)]);
        }
        const double increment = factor * s / static_cast<double>(n);
        path.times.push_back(static_cast<double>(k + 1) * price_dt);
        path.log_price.push_back(path.log_price.back() + increment);
    }
    path.y_terminal = y_path.y.back();
    return path;
}

inline void write_price_path_csv(const PricePath& path, std::ostream& out) {
    out << "time,log_price\n";
    for (std::size_t k = 0; k < path.times.size(); ++k)
        out << format_g17(path.times[k]) << ',' << format_g17(path.log_price[k]) << '\n';
}

inline void write_price_path_csv(const PricePath& path, const std::string& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write price path: " + file);
    write_price_path_csv(path, out);
}

// Terminal price sampler under the risk-neutral dynamics:
//   p(T) = p(t) exp{(r - nu/2) theta + sqrt(nu theta) Z},  Z ~ N(0,1)
// with nu the per-unit-time variance of the log price.
inline std::vector<double> risk_neutral_terminal(double p_t, double r, double theta, double nu,
                                                 int n_samples, Rng& rng) {
    if (!(p_t > 0.0)) throw std::invalid_argument("risk_neutral_terminal: p_t must be positive");
    if (!(theta > 0.0)) throw std::invalid_argument("risk_neutral_terminal: theta must be positive");
    if (nu < 0.0) throw std::invalid_argument("risk_neutral_terminal: negative nu");
    if (n_samples < 1) throw std::invalid_argument("risk_neutral_terminal: n_samples must be >= 1");

    const double drift = (r - 0.5 * nu) * theta;
    const double vol = std::sqrt(nu * theta);
    std::vector<double> out(static_cast<std::size_t>(n_samples));
    for (int k = 0; k < n_samples; ++k)
        out[static_cast<std::size_t>(k)] = p_t * std::exp(drift + vol * rng.normal());
    return out;
}

}  // namespace mgvol
