#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mgvol/phase_curve.hpp"
#include "mgvol/pricer.hpp"

namespace mgvol {

// --- market data -------------------------------------------------------------

struct VolIndexObservation {
    std::string date;  // ISO-8601 YYYY-MM-DD
    double level = 0.0;
};

struct VolIndexSeries {
    std::vector<VolIndexObservation> observations;
    double min_value = 0.0;
};

struct OptionQuote {
    double spot = 0.0;
    double strike = 0.0;
    double maturity = 0.0;  // years
    double rate = 0.0;      // per year
    double market_iv = 0.0; // annualized, decimal

    double moneyness() const { return spot / strike; }
};

namespace detail {

inline std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    for (auto& f : fields) {
        const auto b = f.find_first_not_of(" \t");
        const auto e = f.find_last_not_of(" \t");
        f = b == std::string::npos ? std::string{} : f.substr(b, e - b + 1);
    }
    return fields;
}

inline double parse_number(const std::string& field, const std::string& what, int line_no) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(field, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != field.size() || field.empty())
        throw std::invalid_argument("line " + std::to_string(line_no) + ": malformed " + what + " '" +
                                    field + "'");
    return value;
}

// Returns a sortable key for a date, enforcing the YYYY-MM-DD shape.
inline long parse_iso_date(const std::string& field, int line_no) {
    int y = 0, m = 0, d = 0;
    char tail = 0;
    if (std::sscanf(field.c_str(), "%4d-%2d-%2d%c", &y, &m, &d, &tail) != 3 || field.size() != 10 ||
        m < 1 || m > 12 || d < 1 || d > 31)
        throw std::invalid_argument("line " + std::to_string(line_no) + ": malformed date '" + field +
                                    "' (expected YYYY-MM-DD)");
    return static_cast<long>(y) * 10000 + m * 100 + d;
}

}  // namespace detail

// Option chain CSV, header: spot,strike,maturity_years,rate,market_iv
inline std::vector<OptionQuote> ingest_chain(std::istream& in, const std::string& origin = "chain") {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument(origin + ": empty input");
    if (detail::split_csv_row(line) !=
        std::vector<std::string>{"spot", "strike", "maturity_years", "rate", "market_iv"})
        throw std::invalid_argument(origin + ": unexpected header '" + line + "'");

    std::vector<OptionQuote> chain;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = detail::split_csv_row(line);
        if (fields.size() != 5)
            throw std::invalid_argument(origin + ": line " + std::to_string(line_no) +
                                        ": expected 5 fields");
        OptionQuote q;
        q.spot = detail::parse_number(fields[0], "spot", line_no);
        q.strike = detail::parse_number(fields[1], "strike", line_no);
        q.maturity = detail::parse_number(fields[2], "maturity_years", line_no);
        q.rate = detail::parse_number(fields[3], "rate", line_no);
        q.market_iv = detail::parse_number(fields[4], "market_iv", line_no);
        if (!(q.spot > 0.0) || !(q.strike > 0.0))
            throw std::invalid_argument(origin + ": line " + std::to_string(line_no) +
                                        ": spot and strike must be positive");
        if (!(q.maturity > 0.0))
            throw std::invalid_argument(origin + ": line " + std::to_string(line_no) +
                                        ": maturity must be positive");
        if (!(q.market_iv > 0.0))
            throw std::invalid_argument(origin + ": line " + std::to_string(line_no) +
                                        ": market_iv must be positive");
        chain.push_back(q);
    }
    if (chain.empty()) throw std::invalid_argument(origin + ": no quotes");
    return chain;
}

inline std::vector<OptionQuote> ingest_chain(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open option chain: " + path);
    return ingest_chain(in, path);
}

// Volatility index CSV, header: date,level. Dates strictly increasing,
// levels in (0, 5).
inline VolIndexSeries ingest_vol_index(std::istream& in, const std::string& origin = "vol index") {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument(origin + ": empty input");
    if (detail::split_csv_row(line) != std::vector<std::string>{"date", "level"})
        throw std::invalid_argument(origin + ": unexpected header '" + line + "'");

    VolIndexSeries series;
    long prev_key = -1;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = detail::split_csv_row(line);
        if (fields.size() != 2)
            throw std::invalid_argument(origin + ": line " + std::to_string(line_no) +
                                        ": expected 2 fields");
        const long key = detail::parse_iso_date(fields[0], line_no);
        if (key <= prev_key)
            throw std::invalid_argument(origin + ": line " + std::to_string(line_no) +
                                        ": dates must be strictly increasing");
        prev_key = key;
        const double level = detail::parse_number(fields[1], "level", line_no);
        if (!(level > 0.0) || !(level < 5.0))
            throw std::invalid_argument(origin + ": line " + std::to_string(line_no) +
                                        ": level must lie in (0, 5)");
        series.observations.push_back({fields[0], level});
    }
    if (series.observations.empty()) throw std::invalid_argument(origin + ": no observations");
    series.min_value = series.observations.front().level;
    for (const auto& obs : series.observations)
        series.min_value = std::min(series.min_value, obs.level);
    return series;
}

inline VolIndexSeries ingest_vol_index(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open vol index: " + path);
    return ingest_vol_index(in, path);
}

// --- phase-curve branch at and above the critical point -----------------------

// Piecewise-linear interpolation of sigma2_N / N on the asymmetric branch
// (control >= alpha_c). The crowded branch is excluded from calibration.
class PhaseBranch {
public:
    explicit PhaseBranch(const PhaseCurve& curve) {
        if (!curve.critical.found)
            throw std::invalid_argument("PhaseBranch: curve has no detected critical point");
        for (const auto& p : curve.points)
            if (p.control >= curve.critical.control_c) {
                controls_.push_back(p.control);
                per_n_.push_back(p.sigma2_over_n);
            }
        if (controls_.size() < 2)
            throw std::invalid_argument("PhaseBranch: no branch above the critical point");
        critical_control_ = curve.critical.control_c;
    }

    double critical_control() const { return critical_control_; }
    double min_control() const { return controls_.front(); }
    double max_control() const { return controls_.back(); }
    std::span<const double> controls() const { return controls_; }

    double per_n(double control) const {
        if (control < controls_.front())
            throw std::invalid_argument("PhaseBranch: control below the critical point");
        if (control > controls_.back())
            throw std::invalid_argument("PhaseBranch: control above the sweep range");
        const auto it = std::lower_bound(controls_.begin(), controls_.end(), control);
        const std::size_t hi = static_cast<std::size_t>(it - controls_.begin());
        if (hi < controls_.size() && controls_[hi] == control) return per_n_[hi];
        const std::size_t lo = hi - 1;
        const double f = (control - controls_[lo]) / (controls_[hi] - controls_[lo]);
        return per_n_[lo] + f * (per_n_[hi] - per_n_[lo]);
    }

private:
    std::vector<double> controls_;
    std::vector<double> per_n_;
    double critical_control_ = 0.0;
};

// --- two-step calibration ------------------------------------------------------

// Step 1: link the game to the market through the minimum market volatility,
//   sqrt(nu_mkt_min) = sqrt(alpha_c) sigma_c / (w N)  =>  solve for w.
inline double calibrate_w(const VolIndexSeries& series, const PhaseCurve& curve, int n) {
    if (series.observations.empty()) throw std::invalid_argument("calibrate_w: empty vol index series");
    if (!curve.critical.found)
        throw std::invalid_argument("calibrate_w: curve has no detected critical point");
    if (n < 1) throw std::invalid_argument("calibrate_w: n must be >= 1");
    return std::sqrt(curve.critical.control_c) * curve.critical.sigma_c /
           (static_cast<double>(n) * series.min_value);
}

enum class FitMode { flat, maturity_scaled };

inline std::string to_string(FitMode m) { return m == FitMode::flat ? "flat" : "maturity_scaled"; }

inline FitMode fit_mode_from_string(const std::string& s) {
    if (s == "flat") return FitMode::flat;
    if (s == "maturity_scaled") return FitMode::maturity_scaled;
    throw std::invalid_argument("unknown fit mode '" + s + "'");
}

struct ModelIvParams {
    double w_bar = 1.0;
    int n = 101;
    FitMode mode = FitMode::flat;
    // maturity_scaled mode: per-quote agent count N_j = max(n_min,
    // round(maturity / time_scale)), tying game size to option maturity.
    double time_scale = 0.01;
    int n_min = 10;
};

// Step 2 model volatility, sqrt(control * sigma2_N(control)) / (w N). In flat
// mode N is the calibration size for every quote; in maturity_scaled mode N
// is derived from the quote's maturity.
inline double model_iv(double control, const PhaseBranch& branch, const ModelIvParams& params,
                       const OptionQuote& quote) {
    const double per_n = branch.per_n(control);
    double n_eff = static_cast<double>(params.n);
    if (params.mode == FitMode::maturity_scaled)
        n_eff = static_cast<double>(
            std::max<long long>(params.n_min, std::llround(quote.maturity / params.time_scale)));
    return std::sqrt(control * per_n * n_eff) / (params.w_bar * n_eff);
}

inline double model_iv(double control, const PhaseCurve& curve, const ModelIvParams& params,
                       const OptionQuote& quote) {
    return model_iv(control, PhaseBranch(curve), params, quote);
}

struct PerOptionFit {
    OptionQuote quote;
    double model_iv = 0.0;
    double residual = 0.0;  // market_iv - model_iv
};

struct CalibrationResult {
    double w_bar = 0.0;
    double fitted_control = 0.0;
    double fitted_sigma2_n = 0.0;
    double sse = 0.0;
    std::vector<PerOptionFit> per_option;
    double critical_gap = 0.0;    // fitted_control - alpha_c
    double w_unrescaled = 0.0;    // w_bar * sqrt(N), the no-time-rescaling value
    FitMode mode = FitMode::flat;
    bool pinned_at_critical = false;
};

namespace detail {

inline double chain_sse(double control, const PhaseBranch& branch, const ModelIvParams& params,
                        std::span<const OptionQuote> chain) {
    double sse = 0.0;
    for (const auto& q : chain) {
        const double r = q.market_iv - model_iv(control, branch, params, q);
        sse += r * r;
    }
    return sse;
}

// Golden-section minimum of fn on [a, b] to a relative width of 1e-6.
template <typename Fn>
double golden_section_min(Fn&& fn, double a, double b) {
    constexpr double invphi = 0.6180339887498948482;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = fn(x1);
    double f2 = fn(x2);
    while (b - a > 1e-6 * std::max({std::abs(a), std::abs(b), 1e-12})) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = fn(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = fn(x2);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace detail

// Least-squares fit of the control parameter against a quote chain:
// coarse pass over the sweep nodes, golden-section refinement around the best
// node, deterministic tie-break toward the smaller control. The returned
// control never beats any grid node by less than it claims (global-grid
// dominance) and never drops below the critical point.
inline CalibrationResult calibrate_chain(std::span<const OptionQuote> chain, const PhaseCurve& curve,
                                         const ModelIvParams& params) {
    if (chain.empty()) throw std::invalid_argument("calibrate_chain: empty chain");
    const PhaseBranch branch(curve);

    const auto nodes = branch.controls();
    std::size_t best = 0;
    double best_sse = detail::chain_sse(nodes[0], branch, params, chain);
    for (std::size_t k = 1; k < nodes.size(); ++k) {
        const double s = detail::chain_sse(nodes[k], branch, params, chain);
        if (s < best_sse) {
            best_sse = s;
            best = k;
        }
    }

    const double lo = nodes[best > 0 ? best - 1 : 0];
    const double hi = nodes[std::min(best + 1, nodes.size() - 1)];
    double fitted = nodes[best];
    double fitted_sse = best_sse;
    if (hi > lo) {
        const double refined = detail::golden_section_min(
            [&](double c) { return detail::chain_sse(c, branch, params, chain); }, lo, hi);
        const double refined_sse = detail::chain_sse(refined, branch, params, chain);
        if (refined_sse < fitted_sse || (refined_sse == fitted_sse && refined < fitted)) {
            fitted = refined;
            fitted_sse = refined_sse;
        }
    }

    CalibrationResult result;
    result.w_bar = params.w_bar;
    result.fitted_control = fitted;
    result.fitted_sigma2_n = branch.per_n(fitted) * static_cast<double>(params.n);
    result.sse = fitted_sse;
    result.critical_gap = fitted - branch.critical_control();
    result.w_unrescaled = params.w_bar * std::sqrt(static_cast<double>(params.n));
    result.mode = params.mode;
    result.pinned_at_critical = fitted == branch.min_control();
    result.per_option.reserve(chain.size());
    for (const auto& q : chain) {
        PerOptionFit fit;
        fit.quote = q;
        fit.model_iv = model_iv(fitted, branch, params, q);
        fit.residual = q.market_iv - fit.model_iv;
        result.per_option.push_back(fit);
    }
    return result;
}

}  // namespace mgvol
