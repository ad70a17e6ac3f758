#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "mgvol/game_config.hpp"
#include "mgvol/mg_engine.hpp"

namespace mgvol {

// Agents 0..N_s-1 are speculators (scored, threshold epsilon); the rest are
// producers, active every step and carrying no scores.
struct GcmgState {
    std::vector<double> u;  // speculator scores
    long long t = 0;
    std::vector<double> attendance_history;
    std::vector<int> activity_history;  // active agent counts, >= N_p each step
};

inline GcmgState make_gcmg_state(const GameConfig& config) {
    GcmgState st;
    st.u.assign(static_cast<std::size_t>(config.n_speculators), 0.0);
    return st;
}

struct GcmgStepResult {
    double attendance = 0.0;
    int mu = 0;
    int n_active = 0;
};

// One game step. Draw order: one uniform from the mu stream, then one
// uniform per speculator (in agent order) from the choice stream.
//
// A speculator trades with probability 1/(1 + exp(-G U_i)), increasing in
// the score. The game's own display reads 1/(1 + exp(+G U_i)), which
// contradicts the accompanying "the larger U_i the more likely the agent
// trades"; pass literal_sign = true to run that decreasing form instead.
// Every speculator's score is then updated with the attendance and the
// threshold, traded or not.
inline GcmgStepResult gcmg_step(GcmgState& state, const StrategyTable& table,
                                const GameConfig& config, Rng& mu_stream, Rng& choice_stream,
                                bool literal_sign = false) {
    const int n = config.n;
    const int n_s = config.n_speculators;
    const int p = config.p;
    const int mu = static_cast<int>(mu_stream.uniform_below(static_cast<std::uint32_t>(p)));

    double attendance = 0.0;
    int n_active = n - n_s;  // producers always trade
    for (int i = 0; i < n_s; ++i) {
        const double z = config.gamma * state.u[static_cast<std::size_t>(i)];
        const double p_trade = literal_sign ? logistic(-z) : logistic(z);
        if (choice_stream.uniform01() < p_trade) {
            attendance += table.at(i, 0, mu);
            ++n_active;
        }
    }
    for (int i = n_s; i < n; ++i) attendance += table.at(i, 0, mu);

    const double kick = attendance / static_cast<double>(p);
    const double drag = config.epsilon / static_cast<double>(p);
    for (int i = 0; i < n_s; ++i)
        state.u[static_cast<std::size_t>(i)] -= table.at(i, 0, mu) * kick + drag;

    state.t += 1;
    state.attendance_history.push_back(attendance);
    state.activity_history.push_back(n_active);
    return {attendance, mu, n_active};
}

struct GcmgRun {
    GcmgState state;
    SigmaEstimate sigma;
};

inline GcmgRun run_gcmg(const GameConfig& config, const StrategyTable& table, long long burn_in,
                        long long measure, bool literal_sign = false) {
    config.validate();
    if (config.kind != GameKind::gcmg) throw std::invalid_argument("run_gcmg: config kind must be gcmg");
    RngStreams streams(config.seed);
    GcmgRun run;
    run.state = make_gcmg_state(config);
    run.sigma = detail::accumulate_sigma(
        [&] {
            return gcmg_step(run.state, table, config, streams.mu, streams.choice, literal_sign)
                .attendance;
        },
        config, burn_in, measure);
    return run;
}

inline SigmaEstimate estimate_sigma_gcmg(const GameConfig& config, const StrategyTable& table,
                                         long long burn_in, long long measure,
                                         bool literal_sign = false) {
    return run_gcmg(config, table, burn_in, measure, literal_sign).sigma;
}

// --- sweep over the speculator fraction --------------------------------------

// One resolved grid point: P and N_s are the nearest integer pair to the
// requested (n_s, L) targets, with the deviation recorded.
struct GcmgGridPoint {
    double n_s_target = 0.0;
    GameConfig config;
    double alpha_ns = 0.0;    // from the resolved integer counts
    double n_s_actual = 0.0;  // N_s / P
    long long l_actual = 0;   // P * N_s
};

inline GcmgGridPoint resolve_gcmg_point(const GameConfig& base, double n_s_target, double n_p_frac,
                                        long long l) {
    if (!(n_s_target > 0.0) || l < 1 || n_p_frac < 0.0)
        throw std::invalid_argument("resolve_gcmg_point: bad grid target");
    GcmgGridPoint pt;
    pt.n_s_target = n_s_target;
    const int n_s = std::max(1, static_cast<int>(std::llround(
                                    std::sqrt(static_cast<double>(l) * n_s_target))));
    const int p = std::max(1, static_cast<int>(std::llround(static_cast<double>(l) / n_s)));
    const int n_p = static_cast<int>(std::llround(n_p_frac * p));

    pt.config = base;
    pt.config.kind = GameKind::gcmg;
    pt.config.m.reset();
    pt.config.p = p;
    pt.config.n_speculators = n_s;
    pt.config.n_producers = n_p;
    pt.config.n = n_s + n_p;
    pt.alpha_ns = pt.config.alpha_ns();
    pt.n_s_actual = pt.config.spec_fraction();
    pt.l_actual = pt.config.liquidity_l();
    return pt;
}

struct GcmgSweepResult {
    PhaseCurve curve;
    std::vector<GcmgGridPoint> grid;            // aligned with curve.points
    std::vector<std::vector<double>> per_seed;  // aligned with curve.points
};

// Sweeps sigma2_N / N against alpha_ns = 1/(n_s + n_p) at fixed L = P * N_s
// and fixed producer fraction. epsilon overrides the base config's value.
inline GcmgSweepResult sweep_phase_gcmg(const GameConfig& base, std::span<const double> n_s_grid,
                                        double n_p_frac, long long l, double epsilon,
                                        const SweepOptions& opt) {
    if (n_s_grid.empty()) throw std::invalid_argument("sweep_phase_gcmg: empty grid");
    if (opt.seeds_per_point < 1)
        throw std::invalid_argument("sweep_phase_gcmg: seeds_per_point must be >= 1");

    GcmgSweepResult result;
    result.per_seed.resize(n_s_grid.size());
    for (double n_s_target : n_s_grid) {
        GcmgGridPoint pt = resolve_gcmg_point(base, n_s_target, n_p_frac, l);
        pt.config.epsilon = epsilon;
        pt.config.validate();
        result.grid.push_back(std::move(pt));
    }

    for (std::size_t idx = 0; idx < result.grid.size(); ++idx) {
        const GcmgGridPoint& pt = result.grid[idx];
        const double control = pt.alpha_ns;
        if (const PhasePoint* prior = detail::find_resumed(opt.resume, control)) {
            result.curve.points.push_back(*prior);
            continue;
        }

        const GameConfig& cfg = pt.config;
        const long long burn = opt.burn_in >= 0 ? opt.burn_in : default_burn_in(cfg);
        const long long measure = opt.measure >= 0 ? opt.measure : default_measure(cfg);
        const int seeds = opt.seeds_per_point;
        std::vector<double> values(static_cast<std::size_t>(seeds));
        std::vector<double> run_stderr(static_cast<std::size_t>(seeds));
        parallel_for(static_cast<std::size_t>(seeds), opt.threads, [&](std::size_t k) {
            GameConfig run_cfg = cfg;
            run_cfg.seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(k));
            const StrategyTable table = generate_strategies(run_cfg);
            const SigmaEstimate est =
                estimate_sigma_gcmg(run_cfg, table, burn, measure, opt.literal_activation);
            values[k] = est.per_n;
            run_stderr[k] = est.stderr_ / static_cast<double>(cfg.n);
        });

        const PhasePoint point = detail::aggregate_point(control, values, run_stderr[0]);
        result.per_seed[idx] = std::move(values);
        result.curve.points.push_back(point);
        if (opt.on_point) opt.on_point(point);
    }

    // Sort everything ascending in the control parameter (the n_s grid maps
    // to descending alpha_ns).
    std::vector<std::size_t> order(result.curve.points.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return result.curve.points[a].control < result.curve.points[b].control;
    });
    GcmgSweepResult sorted;
    for (std::size_t i : order) {
        sorted.curve.points.push_back(result.curve.points[i]);
        sorted.grid.push_back(std::move(result.grid[i]));
        sorted.per_seed.push_back(std::move(result.per_seed[i]));
    }
    result.curve.points = std::move(sorted.curve.points);
    result.grid = std::move(sorted.grid);
    result.per_seed = std::move(sorted.per_seed);

    std::vector<double> n_at_point(result.grid.size());
    for (std::size_t i = 0; i < result.grid.size(); ++i)
        n_at_point[i] = static_cast<double>(result.grid[i].config.n);
    result.curve.critical = detect_critical(result.curve.points, n_at_point);
    return result;
}

// Log-spaced n_s grid.
inline std::vector<double> gcmg_ns_grid(double ns_min, double ns_max, int n_points) {
    if (n_points < 1 || !(ns_min > 0.0) || !(ns_max >= ns_min))
        throw std::invalid_argument("gcmg_ns_grid: bad grid spec");
    std::vector<double> grid(static_cast<std::size_t>(n_points));
    for (int k = 0; k < n_points; ++k) {
        const double f = n_points == 1 ? 0.0 : static_cast<double>(k) / (n_points - 1);
        grid[static_cast<std::size_t>(k)] = ns_min * std::pow(ns_max / ns_min, f);
    }
    return grid;
}

}  // namespace mgvol
