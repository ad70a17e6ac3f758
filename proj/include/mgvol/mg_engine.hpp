#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "mgvol/game_config.hpp"
#include "mgvol/parallel.hpp"
#include "mgvol/phase_curve.hpp"
#include "mgvol/rng.hpp"
#include "mgvol/stats.hpp"
#include "mgvol/strategy.hpp"

namespace mgvol {

// Overflow-safe logistic.
inline double logistic(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

struct MgState {
    std::vector<double> u_plus;   // scores of strategy +
    std::vector<double> u_minus;  // scores of strategy -
    long long t = 0;
    std::vector<double> attendance_history;

    // y_i = gamma * (U_+ - U_-) / 2, the only score combination that drives
    // the choice probabilities.
    double y(int i, double gamma) const {
        return gamma * (u_plus[static_cast<std::size_t>(i)] - u_minus[static_cast<std::size_t>(i)]) / 2.0;
    }
};

inline MgState make_mg_state(const GameConfig& config) {
    MgState st;
    st.u_plus.assign(static_cast<std::size_t>(config.n), 0.0);
    st.u_minus.assign(static_cast<std::size_t>(config.n), 0.0);
    return st;
}

struct MgStepResult {
    double attendance = 0.0;
    int mu = 0;
};

// One game step. Draw order is part of the deterministic contract:
// one uniform from the mu stream, then one uniform per agent (in agent
// order) from the choice stream. Each agent plays + with softmax probability
// exp(G U+) / (exp(G U+) + exp(G U-)), and both strategies of every agent
// are scored against the resulting attendance.
inline MgStepResult mg_step(MgState& state, const StrategyTable& table, const GameConfig& config,
                            Rng& mu_stream, Rng& choice_stream) {
    const int n = config.n;
    const int p = config.p;
    const int mu = static_cast<int>(mu_stream.uniform_below(static_cast<std::uint32_t>(p)));

    double attendance = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = config.gamma *
                         (state.u_plus[static_cast<std::size_t>(i)] - state.u_minus[static_cast<std::size_t>(i)]);
        const bool plays_plus = choice_stream.uniform01() < logistic(z);
        attendance += table.at(i, plays_plus ? 0 : 1, mu);
    }

    const double kick = attendance / static_cast<double>(p);
    for (int i = 0; i < n; ++i) {
        state.u_plus[static_cast<std::size_t>(i)] -= table.at(i, 0, mu) * kick;
        state.u_minus[static_cast<std::size_t>(i)] -= table.at(i, 1, mu) * kick;
    }

    state.t += 1;
    state.attendance_history.push_back(attendance);
    return {attendance, mu};
}

struct SigmaEstimate {
    double sigma2_n = 0.0;  // (1/w^2) time average of B^2
    double per_n = 0.0;     // sigma2_n / N
    double stderr_ = 0.0;   // batch-means standard error of sigma2_n
    long long burn_in = 0;
    long long measured = 0;
};

inline long long default_burn_in(const GameConfig& config) { return 200LL * config.p; }
inline long long default_measure(const GameConfig& config) { return 1000LL * config.p; }

constexpr int kSigmaBatches = 10;

namespace detail {

// Shared sigma accumulation: steps the game burn_in + measure times and
// turns the measured B^2/w^2 series into the order-parameter estimate.
template <typename StepFn>
SigmaEstimate accumulate_sigma(StepFn&& step, const GameConfig& config, long long burn_in,
                               long long measure) {
    if (measure < 1) throw std::invalid_argument("estimate_sigma: measure must be >= 1");
    if (measure < 10LL * kSigmaBatches)
        throw std::invalid_argument("estimate_sigma: measure must be >= 10 * batch count");
    if (burn_in < 0) throw std::invalid_argument("estimate_sigma: negative burn_in");

    for (long long t = 0; t < burn_in; ++t) step();

    const double inv_w2 = 1.0 / (config.w * config.w);
    std::vector<double> series(static_cast<std::size_t>(measure));
    for (long long t = 0; t < measure; ++t) {
        const double b = step();
        series[static_cast<std::size_t>(t)] = b * b * inv_w2;
    }

    SigmaEstimate est;
    est.sigma2_n = mean(series);
    est.per_n = est.sigma2_n / static_cast<double>(config.n);
    est.stderr_ = batch_means_stderr(series, kSigmaBatches);
    est.burn_in = burn_in;
    est.measured = measure;
    return est;
}

}  // namespace detail

struct MgRun {
    MgState state;
    SigmaEstimate sigma;
};

// Runs a fresh game (zero initial scores, streams derived from config.seed)
// and estimates the volatility order parameter over the measurement window.
inline MgRun run_mg(const GameConfig& config, const StrategyTable& table, long long burn_in,
                    long long measure) {
    config.validate();
    RngStreams streams(config.seed);
    MgRun run;
    run.state = make_mg_state(config);
    run.sigma = detail::accumulate_sigma(
        [&] { return mg_step(run.state, table, config, streams.mu, streams.choice).attendance; },
        config, burn_in, measure);
    return run;
}

inline SigmaEstimate estimate_sigma(const GameConfig& config, const StrategyTable& table,
                                    long long burn_in, long long measure) {
    return run_mg(config, table, burn_in, measure).sigma;
}

// --- phase sweep -------------------------------------------------------------

struct SweepOptions {
    int seeds_per_point = 8;
    long long burn_in = -1;   // -1: 200 * P per point
    long long measure = -1;   // -1: 1000 * P per point
    int threads = 0;          // 0: hardware concurrency
    bool literal_activation = false;  // gcmg only; see gcmg_engine.hpp
    // Called in grid order for each freshly computed point (not for resumed
    // ones), after the point is aggregated. Lets callers persist progress.
    std::function<void(const PhasePoint&)> on_point;
    // Previously computed points, matched by exact control value; matched
    // grid entries are not recomputed.
    std::vector<PhasePoint> resume;
};

struct MgSweepResult {
    PhaseCurve curve;
    // Per-point per-seed sigma2_over_n values; empty for resumed points.
    std::vector<std::vector<double>> per_seed;
};

namespace detail {

inline const PhasePoint* find_resumed(const std::vector<PhasePoint>& resume, double control) {
    for (const auto& p : resume)
        if (p.control == control) return &p;
    return nullptr;
}

// Aggregates per-seed order-parameter estimates into one curve point.
inline PhasePoint aggregate_point(double control, std::span<const double> seed_values,
                                  double single_run_stderr) {
    PhasePoint point;
    point.control = control;
    point.n_seeds = static_cast<int>(seed_values.size());
    point.sigma2_over_n = mean(seed_values);
    point.stderr_ = seed_values.size() >= 2 ? standard_error(seed_values) : single_run_stderr;
    return point;
}

// Sorts curve points (and the aligned per-seed table) by control.
inline void sort_by_control(std::vector<PhasePoint>& points,
                            std::vector<std::vector<double>>& per_seed) {
    std::vector<std::size_t> order(points.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return points[a].control < points[b].control; });
    std::vector<PhasePoint> sorted_points;
    std::vector<std::vector<double>> sorted_seed;
    sorted_points.reserve(points.size());
    sorted_seed.reserve(per_seed.size());
    for (std::size_t i : order) {
        sorted_points.push_back(points[i]);
        sorted_seed.push_back(std::move(per_seed[i]));
    }
    points = std::move(sorted_points);
    per_seed = std::move(sorted_seed);
}

}  // namespace detail

// Sweeps sigma2_N / N over a grid of MG configs that share everything but
// the control ratio alpha = P/N. Each (point, seed) run is independent, with
// its root derived from (config.seed, seed index) so the outcome does not
// depend on scheduling.
inline MgSweepResult sweep_phase(const std::vector<GameConfig>& configs, const SweepOptions& opt) {
    if (configs.empty()) throw std::invalid_argument("sweep_phase: empty grid");
    for (const auto& cfg : configs) {
        cfg.validate();
        if (cfg.kind != GameKind::mg) throw std::invalid_argument("sweep_phase: configs must be MG");
        if (cfg.w != configs[0].w || cfg.gamma != configs[0].gamma || cfg.n != configs[0].n)
            throw std::invalid_argument("sweep_phase: configs must share N, w and gamma");
    }
    if (opt.seeds_per_point < 1) throw std::invalid_argument("sweep_phase: seeds_per_point must be >= 1");

    MgSweepResult result;
    result.per_seed.resize(configs.size());
    result.curve.points.reserve(configs.size());

    for (std::size_t pt = 0; pt < configs.size(); ++pt) {
        const GameConfig& cfg = configs[pt];
        const double control = cfg.alpha();
        if (const PhasePoint* prior = detail::find_resumed(opt.resume, control)) {
            result.curve.points.push_back(*prior);
            continue;
        }

        const long long burn = opt.burn_in >= 0 ? opt.burn_in : default_burn_in(cfg);
        const long long measure = opt.measure >= 0 ? opt.measure : default_measure(cfg);
        const int seeds = opt.seeds_per_point;
        std::vector<double> values(static_cast<std::size_t>(seeds));
        std::vector<double> run_stderr(static_cast<std::size_t>(seeds));
        parallel_for(static_cast<std::size_t>(seeds), opt.threads, [&](std::size_t k) {
            GameConfig run_cfg = cfg;
            run_cfg.seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(k));
            const StrategyTable table = generate_strategies(run_cfg);
            const SigmaEstimate est = estimate_sigma(run_cfg, table, burn, measure);
            values[k] = est.per_n;
            run_stderr[k] = est.stderr_ / static_cast<double>(cfg.n);
        });

        const PhasePoint point = detail::aggregate_point(control, values, run_stderr[0]);
        result.per_seed[pt] = std::move(values);
        result.curve.points.push_back(point);
        if (opt.on_point) opt.on_point(point);
    }

    detail::sort_by_control(result.curve.points, result.per_seed);
    result.curve.critical = detect_critical(result.curve.points, static_cast<double>(configs[0].n));
    return result;
}

// Convenience grid builder: log-spaced alphas mapped to P = round(alpha * N).
inline std::vector<GameConfig> mg_alpha_grid(const GameConfig& base, double alpha_min,
                                             double alpha_max, int n_points) {
    if (n_points < 1 || !(alpha_min > 0.0) || !(alpha_max >= alpha_min))
        throw std::invalid_argument("mg_alpha_grid: bad grid spec");
    std::vector<GameConfig> grid;
    grid.reserve(static_cast<std::size_t>(n_points));
    for (int k = 0; k < n_points; ++k) {
        const double f = n_points == 1 ? 0.0 : static_cast<double>(k) / (n_points - 1);
        const double alpha = alpha_min * std::pow(alpha_max / alpha_min, f);
        GameConfig cfg = base;
        cfg.kind = GameKind::mg;
        cfg.m.reset();
        cfg.p = std::max(1, static_cast<int>(std::llround(alpha * base.n)));
        grid.push_back(cfg);
    }
    return grid;
}

}  // namespace mgvol
