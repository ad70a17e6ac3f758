// mgvol command-line front end: phase sweeps, game simulation, option
// pricing, calibration and figure-data emission.
//
// Exit codes: 0 success, 2 usage, 3 missing input, 4 numeric failure.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mgvol/calibration.hpp"
#include "mgvol/game_config.hpp"
#include "mgvol/gcmg_engine.hpp"
#include "mgvol/json_io.hpp"
#include "mgvol/manifest.hpp"
#include "mgvol/mg_engine.hpp"
#include "mgvol/pricer.hpp"
#include "mgvol/price_path.hpp"
#include "mgvol/version.hpp"

namespace fs = std::filesystem;
using mgvol::json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitMissingInput = 3;
constexpr int kExitNumeric = 4;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MissingInputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require_file(const std::string& path, const std::string& what) {
    if (!fs::exists(path)) throw MissingInputError(what + " not found: " + path);
}

std::string default_out_dir() {
    if (const char* env = std::getenv("MGVOL_OUT_DIR")) return env;
    return ".";
}

// min:max:count
struct GridSpec {
    double min = 0.0, max = 0.0;
    int count = 0;
};

GridSpec parse_grid(const std::string& text) {
    GridSpec g;
    char c1 = 0, c2 = 0;
    std::istringstream in(text);
    if (!(in >> g.min >> c1 >> g.max >> c2 >> g.count) || c1 != ':' || c2 != ':' || !in.eof())
        throw UsageError("bad grid spec '" + text + "' (expected min:max:count)");
    if (!(g.min > 0.0) || g.max < g.min || g.count < 1)
        throw UsageError("bad grid spec '" + text + "' (need 0 < min <= max, count >= 1)");
    return g;
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

void write_manifest(mgvol::RunManifest& manifest, const std::string& path) {
    manifest.finished_at = mgvol::RunManifest::now_iso8601();
    mgvol::write_json_file(manifest.to_json(), path);
}

void emit_json(const json& j, const std::string& out_path, mgvol::RunManifest* manifest) {
    if (out_path.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        mgvol::write_json_file(j, out_path);
        if (manifest) {
            manifest->outputs.push_back(out_path);
            write_manifest(*manifest, out_path + ".manifest.json");
        }
    }
}

// --- sweep -------------------------------------------------------------------

struct SweepArgs {
    std::string kind = "mg";
    std::string config_path;
    std::string out_dir;
    std::string name;
    std::string alpha_grid = "0.05:8:13";
    std::string ns_grid = "0.5:64:12";
    int n = 101;
    double gamma = 1.0;
    double w = 1.0;
    double eps = 0.01;
    double np_frac = 1.0;
    long long l = 8000;
    std::uint64_t seed = 1;
    int seeds = 8;
    long long burn = -1;
    long long measure = -1;
    int threads = 0;
    bool literal_activation = false;
};

int run_sweep(const SweepArgs& args) {
    const std::string out_dir = args.out_dir.empty() ? default_out_dir() : args.out_dir;
    fs::create_directories(out_dir);
    const std::string name = args.name.empty() ? (args.kind + "_sweep") : args.name;
    const std::string csv_path = out_dir + "/" + name + ".csv";
    const std::string sidecar_path = out_dir + "/" + name + ".critical.json";
    const std::string manifest_path = out_dir + "/" + name + ".manifest.json";

    mgvol::GameConfig base;
    if (!args.config_path.empty()) {
        require_file(args.config_path, "config file");
        base = mgvol::load_game_config(args.config_path);
    }
    base.n = args.n;
    base.gamma = args.gamma;
    base.w = args.w;
    base.seed = args.seed;

    mgvol::SweepOptions opt;
    opt.seeds_per_point = args.seeds;
    opt.burn_in = args.burn;
    opt.measure = args.measure;
    opt.threads = args.threads;
    opt.literal_activation = args.literal_activation;
    if (fs::exists(csv_path)) {
        opt.resume = mgvol::read_phase_curve_points(csv_path);
        std::cerr << "resuming: " << opt.resume.size() << " point(s) already in " << csv_path << "\n";
    }
    std::ofstream progress(csv_path + ".partial", std::ios::app);
    opt.on_point = [&](const mgvol::PhasePoint& p) {
        progress << mgvol::format_g17(p.control) << ',' << mgvol::format_g17(p.sigma2_over_n) << ','
                 << mgvol::format_g17(p.stderr_) << ',' << p.n_seeds << '\n';
        progress.flush();
        std::cerr << "point control=" << p.control << " sigma2/N=" << p.sigma2_over_n << "\n";
    };

    mgvol::RunManifest manifest;
    manifest.command = "sweep";
    manifest.seed = args.seed;
    manifest.started_at = mgvol::RunManifest::now_iso8601();

    mgvol::PhaseCurve curve;
    json sidecar;
    if (args.kind == "mg") {
        const GridSpec grid = parse_grid(args.alpha_grid);
        base.kind = mgvol::GameKind::mg;
        const auto configs = mgvol::mg_alpha_grid(base, grid.min, grid.max, grid.count);
        manifest.config_digest = mgvol::digest_hex(mgvol::fnv1a(mgvol::serialize_game_config(base) +
                                                                args.alpha_grid));
        curve = mgvol::sweep_phase(configs, opt).curve;
        sidecar = mgvol::mg_critical_sidecar(curve.critical, base);
    } else if (args.kind == "gcmg") {
        const GridSpec grid = parse_grid(args.ns_grid);
        base.kind = mgvol::GameKind::gcmg;
        const auto ns_grid = mgvol::gcmg_ns_grid(grid.min, grid.max, grid.count);
        base.n_speculators = 1;  // placeholder; resolved per grid point
        base.n_producers = 0;
        base.n = 1;
        manifest.config_digest = mgvol::digest_hex(
            mgvol::fnv1a(args.ns_grid + "|" + std::to_string(args.l) + "|" +
                         std::to_string(args.np_frac) + "|" + std::to_string(args.eps)));
        curve = mgvol::sweep_phase_gcmg(base, ns_grid, args.np_frac, args.l, args.eps, opt).curve;
        sidecar = mgvol::gcmg_critical_sidecar(curve.critical, args.l, args.np_frac, args.eps);
    } else {
        throw UsageError("unknown sweep kind '" + args.kind + "'");
    }

    mgvol::write_phase_curve_csv(curve, csv_path);
    std::error_code ec;
    fs::remove(csv_path + ".partial", ec);
    mgvol::write_json_file(sidecar, sidecar_path);
    manifest.outputs = {csv_path, sidecar_path};
    write_manifest(manifest, manifest_path);

    std::cout << "curve: " << csv_path << "\n";
    if (curve.critical.found)
        std::cout << "critical: control_c=" << curve.critical.control_c
                  << " sigma_c=" << curve.critical.sigma_c << "\n";
    else
        std::cout << "critical: not detected (need >= 3 grid points)\n";
    return 0;
}

// --- simulate ------------------------------------------------------------------

struct SimulateArgs {
    std::string config_path;
    std::string out_dir;
    std::string name = "run";
    long long burn = -1;
    long long steps = -1;
    double p0 = 100.0;
    bool literal_activation = false;
};

int run_simulate(const SimulateArgs& args) {
    require_file(args.config_path, "config file");
    const mgvol::GameConfig cfg = mgvol::load_game_config(args.config_path);
    const long long burn = args.burn >= 0 ? args.burn : mgvol::default_burn_in(cfg);
    const long long steps = args.steps >= 0 ? args.steps : mgvol::default_measure(cfg);

    const std::string out_dir = args.out_dir.empty() ? default_out_dir() : args.out_dir;
    fs::create_directories(out_dir);
    const std::string path_csv = out_dir + "/" + args.name + ".price_path.csv";
    const std::string sigma_path = out_dir + "/" + args.name + ".sigma.json";
    const std::string manifest_path = out_dir + "/" + args.name + ".manifest.json";

    mgvol::RunManifest manifest;
    manifest.command = "simulate";
    manifest.seed = cfg.seed;
    manifest.config_digest = mgvol::digest_hex(mgvol::fnv1a(mgvol::serialize_game_config(cfg)));
    manifest.started_at = mgvol::RunManifest::now_iso8601();

    const mgvol::StrategyTable table = mgvol::generate_strategies(cfg);
    mgvol::SigmaEstimate sigma;
    std::vector<double> measured;
    if (cfg.kind == mgvol::GameKind::mg) {
        auto run = mgvol::run_mg(cfg, table, burn, steps);
        sigma = run.sigma;
        measured.assign(run.state.attendance_history.begin() + burn,
                        run.state.attendance_history.end());
    } else {
        auto run = mgvol::run_gcmg(cfg, table, burn, steps, args.literal_activation);
        sigma = run.sigma;
        measured.assign(run.state.attendance_history.begin() + burn,
                        run.state.attendance_history.end());
    }
    const mgvol::PricePath path = mgvol::price_path_discrete(measured, cfg, args.p0);
    mgvol::write_price_path_csv(path, path_csv);
    mgvol::write_json_file(json{{"sigma2_N", sigma.sigma2_n},
                                {"sigma2_over_N", sigma.per_n},
                                {"stderr", sigma.stderr_},
                                {"burn_in", sigma.burn_in},
                                {"measured", sigma.measured}},
                           sigma_path);
    manifest.outputs = {path_csv, sigma_path};
    write_manifest(manifest, manifest_path);
    std::cout << "sigma2/N=" << sigma.per_n << " path: " << path_csv << "\n";
    return 0;
}

// --- price / implied -------------------------------------------------------------

int run_price(double spot, double strike, double rate, double theta, double nu,
              const std::string& out_path) {
    const mgvol::PricingInput inp{spot, strike, rate, theta, nu};
    const double price = mgvol::call_price(inp);
    mgvol::RunManifest manifest;
    manifest.command = "price";
    manifest.config_digest = mgvol::digest_hex(mgvol::fnv1a(std::to_string(spot) + "," +
                                                            std::to_string(strike)));
    manifest.started_at = mgvol::RunManifest::now_iso8601();
    emit_json(json{{"call_price", price},
                   {"spot", spot},
                   {"strike", strike},
                   {"rate", rate},
                   {"theta", theta},
                   {"nu", nu},
                   {"iv", std::sqrt(nu)}},
              out_path, &manifest);
    return 0;
}

int run_implied(double price, double spot, double strike, double rate, double theta,
                const std::string& out_path) {
    const double nu = mgvol::implied_nu(price, spot, strike, rate, theta);
    mgvol::RunManifest manifest;
    manifest.command = "implied";
    manifest.config_digest = mgvol::digest_hex(mgvol::fnv1a(std::to_string(price)));
    manifest.started_at = mgvol::RunManifest::now_iso8601();
    emit_json(json{{"nu", nu},
                   {"iv", std::sqrt(nu)},
                   {"target_price", price},
                   {"spot", spot},
                   {"strike", strike},
                   {"rate", rate},
                   {"theta", theta}},
              out_path, &manifest);
    return 0;
}

// --- calibrate -------------------------------------------------------------------

struct CalibrateArgs {
    std::string chain_path;
    std::string vol_index_path;
    std::string curve_path;
    std::string critical_path;  // default: curve path with .critical.json
    std::string out_path;
    std::string label;
    std::string mode = "flat";
    int n = 101;
    double time_scale = 0.01;
    int n_min = 10;
};

int run_calibrate(const CalibrateArgs& args) {
    require_file(args.chain_path, "option chain");
    require_file(args.vol_index_path, "vol index");
    require_file(args.curve_path, "phase curve");
    std::string critical_path = args.critical_path;
    if (critical_path.empty()) {
        critical_path = args.curve_path;
        const auto pos = critical_path.rfind(".csv");
        if (pos != std::string::npos) critical_path.erase(pos);
        critical_path += ".critical.json";
    }
    require_file(critical_path, "critical-point sidecar");

    const auto chain = mgvol::ingest_chain(args.chain_path);
    const auto series = mgvol::ingest_vol_index(args.vol_index_path);
    const mgvol::PhaseCurve curve = mgvol::load_phase_curve(args.curve_path, critical_path);

    mgvol::ModelIvParams params;
    params.n = args.n;
    params.mode = mgvol::fit_mode_from_string(args.mode);
    params.time_scale = args.time_scale;
    params.n_min = args.n_min;
    params.w_bar = mgvol::calibrate_w(series, curve, args.n);

    const mgvol::CalibrationResult result = mgvol::calibrate_chain(chain, curve, params);

    json j = mgvol::calibration_result_to_json(result);
    j["alpha_c"] = curve.critical.control_c;
    j["n"] = args.n;
    j["label"] = args.label.empty() ? stem_of(args.chain_path) : args.label;
    j["inputs"] = json{{"chain", args.chain_path},
                       {"chain_digest", mgvol::file_digest(args.chain_path)},
                       {"vol_index", args.vol_index_path},
                       {"vol_index_digest", mgvol::file_digest(args.vol_index_path)},
                       {"curve", args.curve_path},
                       {"curve_digest", mgvol::file_digest(args.curve_path)}};

    mgvol::RunManifest manifest;
    manifest.command = "calibrate";
    manifest.config_digest = j["inputs"]["chain_digest"].get<std::string>();
    manifest.started_at = mgvol::RunManifest::now_iso8601();
    emit_json(j, args.out_path, &manifest);
    return 0;
}

// --- figure ----------------------------------------------------------------------

struct FigureArgs {
    int id = 0;
    std::vector<std::string> sweeps;
    std::vector<std::string> calibrations;
    std::string out_path;
};

void emit_tidy_row(std::ostream& out, const std::string& series, const std::string& x, double y) {
    out << series << ',' << x << ',' << mgvol::format_g17(y) << '\n';
}

int run_figure(const FigureArgs& args) {
    std::ostringstream body;
    body << "series,x,y\n";

    auto load_calibrations = [&](std::size_t min_count) {
        if (args.calibrations.size() < min_count)
            throw UsageError("figure " + std::to_string(args.id) + ": needs at least " +
                             std::to_string(min_count) + " --calibration input(s)");
        std::vector<std::pair<std::string, json>> loaded;
        for (const auto& path : args.calibrations) {
            require_file(path, "calibration result");
            json j = mgvol::read_json_file(path);
            std::string label = j.contains("label") ? j["label"].get<std::string>() : stem_of(path);
            loaded.emplace_back(std::move(label), std::move(j));
        }
        return loaded;
    };

    switch (args.id) {
        case 1: {
            if (args.sweeps.empty()) throw UsageError("figure 1: needs --sweep input(s)");
            for (const auto& path : args.sweeps) {
                require_file(path, "sweep curve");
                const auto points = mgvol::read_phase_curve_points(path);
                for (const auto& p : points)
                    emit_tidy_row(body, stem_of(path), mgvol::format_g17(p.control), p.sigma2_over_n);
            }
            break;
        }
        case 2: {
            for (const auto& [label, j] : load_calibrations(1)) {
                const double fitted = j.at("fitted_control").get<double>();
                const double gap = j.at("critical_gap").get<double>();
                emit_tidy_row(body, "calibrated", label, fitted);
                emit_tidy_row(body, "critical", label, fitted - gap);
            }
            break;
        }
        case 3:
        case 4:
        case 5:
        case 6:
        case 7: {
            const auto loaded = load_calibrations(1);
            if (loaded.size() != 1)
                throw UsageError("figure " + std::to_string(args.id) +
                                 ": takes exactly one --calibration input");
            const mgvol::CalibrationResult result =
                mgvol::calibration_result_from_json(loaded[0].second);
            char mbuf[32];
            for (const auto& fit : result.per_option) {
                std::snprintf(mbuf, sizeof(mbuf), "%.6g", fit.quote.moneyness());
                emit_tidy_row(body, std::string("market m=") + mbuf,
                              mgvol::format_g17(fit.quote.maturity), fit.quote.market_iv);
                emit_tidy_row(body, std::string("game m=") + mbuf,
                              mgvol::format_g17(fit.quote.maturity), fit.model_iv);
            }
            break;
        }
        case 8: {
            for (const auto& [label, j] : load_calibrations(1)) {
                emit_tidy_row(body, "w_bar", label, j.at("w_bar").get<double>());
                emit_tidy_row(body, "w_unrescaled", label, j.at("w_unrescaled").get<double>());
            }
            break;
        }
        default:
            throw UsageError("unknown figure id " + std::to_string(args.id) + " (expected 1..8)");
    }

    if (args.out_path.empty()) {
        std::cout << body.str();
    } else {
        std::ofstream out(args.out_path);
        if (!out) throw std::runtime_error("cannot write " + args.out_path);
        out << body.str();
        mgvol::RunManifest manifest;
        manifest.command = "figure";
        manifest.config_digest = mgvol::digest_hex(mgvol::fnv1a(body.str()));
        manifest.started_at = mgvol::RunManifest::now_iso8601();
        manifest.outputs = {args.out_path};
        write_manifest(manifest, args.out_path + ".manifest.json");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"minority-game market laboratory: sweeps, pricing, calibration"};
    app.set_version_flag("--version", std::string(mgvol::version));
    app.require_subcommand(1);

    SweepArgs sweep_args;
    auto* sweep = app.add_subcommand("sweep", "phase-curve sweep over the control parameter");
    sweep->add_option("--kind", sweep_args.kind, "mg or gcmg")->required();
    sweep->add_option("--config", sweep_args.config_path, "base game config file");
    sweep->add_option("--out", sweep_args.out_dir, "output directory (default $MGVOL_OUT_DIR or .)");
    sweep->add_option("--name", sweep_args.name, "output base name (default <kind>_sweep)");
    sweep->add_option("--alpha", sweep_args.alpha_grid, "mg alpha grid min:max:count (log-spaced)");
    sweep->add_option("--ns", sweep_args.ns_grid, "gcmg n_s grid min:max:count (log-spaced)");
    sweep->add_option("--n", sweep_args.n, "agents (mg)");
    sweep->add_option("--gamma", sweep_args.gamma, "learning rate");
    sweep->add_option("--w", sweep_args.w, "strategy weight");
    sweep->add_option("--eps", sweep_args.eps, "gcmg speculator threshold");
    sweep->add_option("--np", sweep_args.np_frac, "gcmg producer fraction n_p");
    sweep->add_option("--L", sweep_args.l, "gcmg liquidity L = P * N_s");
    sweep->add_option("--seed", sweep_args.seed, "root seed");
    sweep->add_option("--seeds", sweep_args.seeds, "seeds per grid point");
    sweep->add_option("--burn", sweep_args.burn, "burn-in steps (-1: 200*P)");
    sweep->add_option("--measure", sweep_args.measure, "measured steps (-1: 1000*P)");
    sweep->add_option("--threads", sweep_args.threads, "worker threads (0: hardware)");
    sweep->add_flag("--literal-activation", sweep_args.literal_activation,
                    "gcmg: use the decreasing activation form 1/(1+exp(+G U))");

    SimulateArgs sim_args;
    auto* simulate = app.add_subcommand("simulate", "run one game and emit its price path");
    simulate->add_option("--config", sim_args.config_path, "game config file")->required();
    simulate->add_option("--out", sim_args.out_dir, "output directory");
    simulate->add_option("--name", sim_args.name, "output base name");
    simulate->add_option("--burn", sim_args.burn, "burn-in steps (-1: 200*P)");
    simulate->add_option("--steps", sim_args.steps, "measured steps (-1: 1000*P)");
    simulate->add_option("--p0", sim_args.p0, "initial price");
    simulate->add_flag("--literal-activation", sim_args.literal_activation,
                       "gcmg: use the decreasing activation form");

    double spot = 0, strike = 0, rate = 0, theta = 0, nu = 0, target_price = 0;
    std::string money_out;
    auto* price = app.add_subcommand("price", "European call price with game-implied variance");
    price->add_option("--spot", spot)->required();
    price->add_option("--strike", strike)->required();
    price->add_option("--rate", rate)->required();
    price->add_option("--theta", theta, "maturity in years")->required();
    price->add_option("--nu", nu, "per-unit-time variance")->required();
    price->add_option("--out", money_out, "output JSON file (default stdout)");

    auto* implied = app.add_subcommand("implied", "invert the call price for nu");
    implied->add_option("--price", target_price)->required();
    implied->add_option("--spot", spot)->required();
    implied->add_option("--strike", strike)->required();
    implied->add_option("--rate", rate)->required();
    implied->add_option("--theta", theta)->required();
    implied->add_option("--out", money_out, "output JSON file (default stdout)");

    CalibrateArgs cal_args;
    auto* calibrate = app.add_subcommand("calibrate", "two-step calibration against an option chain");
    calibrate->add_option("--chain", cal_args.chain_path, "option chain CSV")->required();
    calibrate->add_option("--vol-index", cal_args.vol_index_path, "volatility index CSV")->required();
    calibrate->add_option("--curve", cal_args.curve_path, "phase curve CSV")->required();
    calibrate->add_option("--critical", cal_args.critical_path,
                          "critical-point sidecar JSON (default <curve>.critical.json)");
    calibrate->add_option("--n", cal_args.n, "calibration agent count");
    calibrate->add_option("--mode", cal_args.mode, "flat or maturity_scaled");
    calibrate->add_option("--time-scale", cal_args.time_scale,
                          "maturity_scaled: years per game step");
    calibrate->add_option("--n-min", cal_args.n_min, "maturity_scaled: minimum agent count");
    calibrate->add_option("--label", cal_args.label, "label stored in the result");
    calibrate->add_option("--out", cal_args.out_path, "output JSON file (default stdout)");

    FigureArgs fig_args;
    auto* figure = app.add_subcommand("figure", "emit tidy plot data (series,x,y)");
    figure->add_option("--id", fig_args.id, "figure id 1..8")->required();
    figure->add_option("--sweep", fig_args.sweeps, "sweep curve CSV (repeatable)");
    figure->add_option("--calibration", fig_args.calibrations, "calibration JSON (repeatable)");
    figure->add_option("--out", fig_args.out_path, "output CSV file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitUsage;
    }

    try {
        if (sweep->parsed()) return run_sweep(sweep_args);
        if (simulate->parsed()) return run_simulate(sim_args);
        if (price->parsed()) return run_price(spot, strike, rate, theta, nu, money_out);
        if (implied->parsed()) return run_implied(target_price, spot, strike, rate, theta, money_out);
        if (calibrate->parsed()) return run_calibrate(cal_args);
        if (figure->parsed()) return run_figure(fig_args);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const MissingInputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitMissingInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return 0;
}
