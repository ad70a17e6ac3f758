#pragma once

#include <fstream>
#include <span>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "mgvol/calibration.hpp"
#include "mgvol/game_config.hpp"
#include "mgvol/phase_curve.hpp"
#include "mgvol/stats.hpp"

namespace mgvol {

using json = nlohmann::json;

inline void write_json_file(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return json::parse(in);
}

// --- phase-curve sidecars ------------------------------------------------------

inline json mg_critical_sidecar(const CriticalPoint& cp, const GameConfig& cfg) {
    return json{{"alpha_c", cp.control_c},
                {"sigma_c", cp.sigma_c},
                {"N", cfg.n},
                {"gamma", cfg.gamma},
                {"w", cfg.w}};
}

inline json gcmg_critical_sidecar(const CriticalPoint& cp, long long l, double n_p_frac,
                                  double epsilon) {
    return json{{"alpha_ns_c", cp.control_c},
                {"sigma_c", cp.sigma_c},
                {"L", l},
                {"n_p", n_p_frac},
                {"epsilon", epsilon}};
}

inline CriticalPoint critical_from_sidecar(const json& j) {
    CriticalPoint cp;
    cp.found = true;
    if (j.contains("alpha_c")) cp.control_c = j.at("alpha_c").get<double>();
    else if (j.contains("alpha_ns_c")) cp.control_c = j.at("alpha_ns_c").get<double>();
    else throw std::runtime_error("critical sidecar: missing alpha_c / alpha_ns_c");
    cp.sigma_c = j.at("sigma_c").get<double>();
    return cp;
}

inline PhaseCurve load_phase_curve(const std::string& csv_path, const std::string& sidecar_path) {
    PhaseCurve curve;
    curve.points = read_phase_curve_points(csv_path);
    curve.critical = critical_from_sidecar(read_json_file(sidecar_path));
    return curve;
}

// --- calibration results --------------------------------------------------------

inline json calibration_result_to_json(const CalibrationResult& r) {
    json per_option = json::array();
    for (const auto& fit : r.per_option)
        per_option.push_back(json{{"spot", fit.quote.spot},
                                  {"strike", fit.quote.strike},
                                  {"maturity_years", fit.quote.maturity},
                                  {"rate", fit.quote.rate},
                                  {"moneyness", fit.quote.moneyness()},
                                  {"market_iv", fit.quote.market_iv},
                                  {"model_iv", fit.model_iv},
                                  {"residual", fit.residual}});
    return json{{"w_bar", r.w_bar},
                {"fitted_control", r.fitted_control},
                {"fitted_sigma2_N", r.fitted_sigma2_n},
                {"sse", r.sse},
                {"per_option", per_option},
                {"critical_gap", r.critical_gap},
                {"w_unrescaled", r.w_unrescaled},
                {"mode", to_string(r.mode)},
                {"pinned_at_critical", r.pinned_at_critical}};
}

inline CalibrationResult calibration_result_from_json(const json& j) {
    CalibrationResult r;
    r.w_bar = j.at("w_bar").get<double>();
    r.fitted_control = j.at("fitted_control").get<double>();
    r.fitted_sigma2_n = j.at("fitted_sigma2_N").get<double>();
    r.sse = j.at("sse").get<double>();
    r.critical_gap = j.at("critical_gap").get<double>();
    r.w_unrescaled = j.at("w_unrescaled").get<double>();
    r.mode = fit_mode_from_string(j.at("mode").get<std::string>());
    r.pinned_at_critical = j.at("pinned_at_critical").get<bool>();
    for (const auto& e : j.at("per_option")) {
        PerOptionFit fit;
        fit.quote.spot = e.at("spot").get<double>();
        fit.quote.strike = e.at("strike").get<double>();
        fit.quote.maturity = e.at("maturity_years").get<double>();
        fit.quote.rate = e.at("rate").get<double>();
        fit.quote.market_iv = e.at("market_iv").get<double>();
        fit.model_iv = e.at("model_iv").get<double>();
        fit.residual = e.at("residual").get<double>();
        r.per_option.push_back(fit);
    }
    return r;
}

// --- Monte Carlo terminal-sample summary ----------------------------------------

inline json terminal_sample_summary(std::span<const double> samples, std::uint64_t seed) {
    return json{{"mean", mean(samples)},
                {"variance", samples.size() >= 2 ? sample_variance(samples) : 0.0},
                {"count", samples.size()},
                {"seed", seed}};
}

}  // namespace mgvol
