#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mgvol/game_config.hpp"

namespace mgvol {

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244); }

struct PricingInput {
    double spot = 0.0;    // p(t)
    double strike = 0.0;  // K
    double rate = 0.0;    // r, per year
    double theta = 0.0;   // T - t, years
    double nu = 0.0;      // per-unit-time variance of log p

    void validate() const {
        if (!(spot > 0.0)) throw std::invalid_argument("PricingInput: spot must be positive");
        if (!(strike > 0.0)) throw std::invalid_argument("PricingInput: strike must be positive");
        if (!(theta > 0.0)) throw std::invalid_argument("PricingInput: theta must be positive");
        if (!(nu >= 0.0)) throw std::invalid_argument("PricingInput: nu must be >= 0");
        if (!std::isfinite(rate)) throw std::invalid_argument("PricingInput: rate must be finite");
    }
};

// Game-side variance parameters. The per-unit-time variance of the log price
// is nu = control * sigma2_N / (w^2 N^2), with control = alpha for the MG and
// alpha_ns for the GCMG.
struct GameVarianceParams {
    GameKind kind = GameKind::mg;
    double control = 0.0;
    double sigma2_n = 0.0;
    double w = 1.0;
    int n = 0;
};

inline double game_nu(const GameVarianceParams& params) {
    if (!(params.w > 0.0)) throw std::invalid_argument("game_nu: w must be positive");
    if (params.n < 1) throw std::invalid_argument("game_nu: n must be >= 1");
    if (!(params.control >= 0.0) || !(params.sigma2_n >= 0.0))
        throw std::invalid_argument("game_nu: control and sigma2_n must be >= 0");
    const double nw = params.w * static_cast<double>(params.n);
    return params.control * params.sigma2_n / (nw * nw);
}

// European call with game-implied variance:
//   c = p Phi(d) - K e^{-r theta} Phi(d - sqrt(nu theta)),
//   d = [log(p/K) + (r + nu/2) theta] / sqrt(nu theta).
// Degenerate nu theta = 0 collapses to the discounted intrinsic value.
inline double call_price(const PricingInput& inp) {
    inp.validate();
    const double total_var = inp.nu * inp.theta;
    const double discounted_strike = inp.strike * std::exp(-inp.rate * inp.theta);
    if (total_var == 0.0) return std::max(inp.spot - discounted_strike, 0.0);
    const double vol = std::sqrt(total_var);
    const double d = (std::log(inp.spot / inp.strike) + (inp.rate + 0.5 * inp.nu) * inp.theta) / vol;
    return inp.spot * norm_cdf(d) - discounted_strike * norm_cdf(d - vol);
}

// Inverts call_price in nu by bracketed bisection. The price is strictly
// increasing in nu, so the root is unique. Converges until the model price
// matches the target to 1e-10 * spot and the bracket is relatively tight in
// nu, which keeps round trips accurate for low-vega inputs.
inline double implied_nu(double target_price, double spot, double strike, double rate,
                         double theta) {
    PricingInput inp{spot, strike, rate, theta, 0.0};
    inp.validate();
    const double lower = std::max(spot - strike * std::exp(-rate * theta), 0.0);
    if (!(target_price > lower) || !(target_price < spot)) {
        std::ostringstream msg;
        msg << "implied_nu: target price " << target_price << " outside the no-arbitrage bounds ("
            << lower << ", " << spot << ")";
        throw std::invalid_argument(msg.str());
    }

    auto price_at = [&](double nu) {
        inp.nu = nu;
        return call_price(inp);
    };

    double hi = 1.0;
    while (price_at(hi) < target_price) {
        hi *= 2.0;
        if (hi > 1e12) throw std::runtime_error("implied_nu: failed to bracket the target price");
    }

    const double price_tol = 1e-10 * spot;
    double lo = 0.0;
    double mid = 0.5 * hi;
    for (int it = 0; it < 500; ++it) {
        mid = 0.5 * (lo + hi);
        const double c = price_at(mid);
        const bool price_ok = std::abs(c - target_price) <= price_tol;
        const bool width_ok = (hi - lo) <= 1e-9 * std::max(mid, 1e-300);
        if (price_ok && width_ok) return mid;
        (c < target_price ? lo : hi) = mid;
    }
    if (std::abs(price_at(mid) - target_price) <= price_tol) return mid;
    throw std::runtime_error("implied_nu: bisection did not converge");
}

}  // namespace mgvol
