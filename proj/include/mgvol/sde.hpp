#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mgvol/game_config.hpp"
#include "mgvol/matrix.hpp"
#include "mgvol/mg_engine.hpp"
#include "mgvol/rng.hpp"
#include "mgvol/strategy.hpp"

namespace mgvol {

// Continuum-limit score dynamics
//   dy_i = drift_i(y) dt + A_i dW(t)
// with, per game kind,
//   mg:    drift_i = -xi_theta_i - sum_j xi_xi_ij tanh(y_j)
//          A A' = [Gamma sigma2_N w^2 / (alpha N)] xi_xi
//   gcmg:  drift_i = -sum_j a_a_ij H(y_j) - epsilon,  H(y) = 1/(1+e^-y)
//          A A' = [Gamma sigma2_N w^2 (n_s+n_p) / N] a_a
// sigma2_N enters as a frozen coefficient, estimated from the matched
// discrete engine at stationarity.
struct SdeSpec {
    GameKind kind = GameKind::mg;
    int n = 0;
    double gamma = 1.0;
    double w = 1.0;
    double control = 1.0;  // alpha (mg) or alpha_ns (gcmg)
    double sigma2_n = 0.0;
    double epsilon = 0.0;
    std::vector<double> xi_theta;  // mg only
    Matrix coupling;               // xi_xi (mg) or a_a (gcmg)

    // Both kinds reduce to the same expression: (n_s+n_p)/N = 1/(alpha_ns N).
    double diffusion_scale() const { return gamma * sigma2_n * w * w / (control * n); }

    void validate() const {
        if (n < 1 || coupling.size() != n) throw std::invalid_argument("SdeSpec: bad dimension");
        if (!(control > 0.0) || !(gamma > 0.0) || !(w > 0.0))
            throw std::invalid_argument("SdeSpec: control, gamma, w must be positive");
        if (sigma2_n < 0.0) throw std::invalid_argument("SdeSpec: sigma2_n must be >= 0");
        if (kind == GameKind::mg && xi_theta.size() != static_cast<std::size_t>(n))
            throw std::invalid_argument("SdeSpec: xi_theta size mismatch");
    }
};

inline SdeSpec make_sde_spec(const GameConfig& config, const ReducedStats& stats, double sigma2_n) {
    config.validate();
    SdeSpec spec;
    spec.kind = config.kind;
    spec.n = config.n;
    spec.gamma = config.gamma;
    spec.w = config.w;
    spec.control = config.control();
    spec.sigma2_n = sigma2_n;
    spec.epsilon = config.kind == GameKind::gcmg ? config.epsilon : 0.0;
    spec.xi_theta = stats.xi_theta;
    spec.coupling = config.kind == GameKind::mg ? stats.xi_xi : stats.a_a;
    spec.validate();
    return spec;
}

// Euler-Maruyama path on the uniform grid t_k = k dt.
struct YPath {
    double dt = 0.0;
    std::vector<std::vector<double>> y;  // y[k] = state after k steps; y[0] = y0

    std::size_t steps() const { return y.empty() ? 0 : y.size() - 1; }
};

class SdeIntegrator {
public:
    explicit SdeIntegrator(SdeSpec spec)
        : spec_(std::move(spec)),
          noise_factor_(cholesky_psd(spec_.coupling.scaled(spec_.diffusion_scale()))) {
        spec_.validate();
    }

    const SdeSpec& spec() const { return spec_; }
    const Matrix& noise_factor() const { return noise_factor_; }
    Matrix scaled_covariance() const { return spec_.coupling.scaled(spec_.diffusion_scale()); }

    void drift(std::span<const double> y, std::span<double> out) const {
        const int n = spec_.n;
        if (spec_.kind == GameKind::mg) {
            std::vector<double> th(static_cast<std::size_t>(n));
            for (int j = 0; j < n; ++j) th[static_cast<std::size_t>(j)] = std::tanh(y[static_cast<std::size_t>(j)]);
            for (int i = 0; i < n; ++i) {
                double s = -spec_.xi_theta[static_cast<std::size_t>(i)];
                auto row = spec_.coupling.row(i);
                for (int j = 0; j < n; ++j) s -= row[static_cast<std::size_t>(j)] * th[static_cast<std::size_t>(j)];
                out[static_cast<std::size_t>(i)] = s;
            }
        } else {
            std::vector<double> h(static_cast<std::size_t>(n));
            for (int j = 0; j < n; ++j) h[static_cast<std::size_t>(j)] = logistic(y[static_cast<std::size_t>(j)]);
            for (int i = 0; i < n; ++i) {
                double s = -spec_.epsilon;
                auto row = spec_.coupling.row(i);
                for (int j = 0; j < n; ++j) s -= row[static_cast<std::size_t>(j)] * h[static_cast<std::size_t>(j)];
                out[static_cast<std::size_t>(i)] = s;
            }
        }
    }

    // Explicit first-order update y <- y + drift dt + A sqrt(dt) z. Draw
    // order: N normals per step, agent order, from the wiener stream.
    // zero_diffusion drops the noise term (deterministic ODE path).
    YPath integrate(std::span<const double> y0, double horizon, double dt, Rng& wiener,
                    bool zero_diffusion = false) const {
        if (!(dt > 0.0) || !(horizon >= dt))
            throw std::invalid_argument("integrate: require dt > 0 and horizon >= dt");
        if (y0.size() != static_cast<std::size_t>(spec_.n))
            throw std::invalid_argument("integrate: y0 dimension mismatch");
        for (double v : y0)
            if (!std::isfinite(v)) throw std::invalid_argument("integrate: y0 must be finite");

        const long long n_steps = std::max<long long>(1, std::llround(horizon / dt));
        const int n = spec_.n;
        const double sqrt_dt = std::sqrt(dt);

        YPath path;
        path.dt = dt;
        path.y.reserve(static_cast<std::size_t>(n_steps) + 1);
        path.y.emplace_back(y0.begin(), y0.end());

        std::vector<double> dr(static_cast<std::size_t>(n));
        std::vector<double> z(static_cast<std::size_t>(n));
        for (long long k = 0; k < n_steps; ++k) {
            const std::vector<double>& cur = path.y.back();
            std::vector<double> next(static_cast<std::size_t>(n));
            drift(cur, dr);
            if (zero_diffusion) {
                for (int i = 0; i < n; ++i)
                    next[static_cast<std::size_t>(i)] =
                        cur[static_cast<std::size_t>(i)] + dr[static_cast<std::size_t>(i)] * dt;
            } else {
                for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i)] = wiener.normal();
                const std::vector<double> noise = matvec(noise_factor_, z);
                for (int i = 0; i < n; ++i)
                    next[static_cast<std::size_t>(i)] = cur[static_cast<std::size_t>(i)] +
                                                        dr[static_cast<std::size_t>(i)] * dt +
                                                        noise[static_cast<std::size_t>(i)] * sqrt_dt;
            }
            path.y.push_back(std::move(next));
        }
        return path;
    }

private:
    SdeSpec spec_;
    Matrix noise_factor_;
};

// Default integration step: the score relaxation rate is set by gamma.
inline double default_sde_dt(const SdeSpec& spec) { return 0.01 / spec.gamma; }

}  // namespace mgvol
