#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

namespace mgvol {

enum class GameKind { mg, gcmg };

inline std::string to_string(GameKind k) { return k == GameKind::mg ? "mg" : "gcmg"; }

inline GameKind game_kind_from_string(const std::string& s) {
    if (s == "mg") return GameKind::mg;
    if (s == "gcmg") return GameKind::gcmg;
    throw std::invalid_argument("unknown game kind '" + s + "' (expected mg or gcmg)");
}

// Full parameterization of one game instance. Speculators use strategies
// with a finite threshold epsilon; producers are flagged categorically and
// always trade.
struct GameConfig {
    GameKind kind = GameKind::mg;
    int n = 101;                 // agents
    int p = 32;                  // information states
    std::optional<int> m;        // when set, p = 2^m (both are recorded)
    double gamma = 1.0;          // learning rate, finite
    double w = 1.0;              // strategy weight / inverse liquidity
    double epsilon = 0.0;        // speculator threshold (gcmg)
    int n_speculators = 0;       // gcmg
    int n_producers = 0;         // gcmg
    std::uint64_t seed = 1;

    int strategies_per_agent() const { return kind == GameKind::mg ? 2 : 1; }

    double alpha() const { return static_cast<double>(p) / static_cast<double>(n); }
    double spec_fraction() const { return static_cast<double>(n_speculators) / static_cast<double>(p); }
    double prod_fraction() const { return static_cast<double>(n_producers) / static_cast<double>(p); }
    double alpha_ns() const { return 1.0 / (spec_fraction() + prod_fraction()); }
    long long liquidity_l() const {
        return static_cast<long long>(p) * static_cast<long long>(n_speculators);
    }

    // Control parameter of the phase curve for this kind.
    double control() const { return kind == GameKind::mg ? alpha() : alpha_ns(); }

    void validate() const {
        if (n < 1) throw std::invalid_argument("GameConfig: n must be >= 1");
        if (p < 1) throw std::invalid_argument("GameConfig: p must be >= 1");
        if (m && (1 << *m) != p) throw std::invalid_argument("GameConfig: p must equal 2^m when m is set");
        if (!(gamma > 0.0) || !std::isfinite(gamma))
            throw std::invalid_argument("GameConfig: gamma must be positive and finite");
        if (!(w > 0.0)) throw std::invalid_argument("GameConfig: w must be positive");
        if (kind == GameKind::gcmg) {
            if (n_speculators < 0 || n_producers < 0)
                throw std::invalid_argument("GameConfig: agent class counts must be non-negative");
            if (n_speculators + n_producers != n)
                throw std::invalid_argument("GameConfig: n_speculators + n_producers must equal n");
            if (!std::isfinite(epsilon)) throw std::invalid_argument("GameConfig: epsilon must be finite");
        }
    }
};

// --- flat key-value config file -------------------------------------------
//
//   kind = mg            # or gcmg
//   n = 101
//   p = 808              # or: m = 5  (p is then 2^m)
//   gamma = 1.0          # default
//   w = 1.0              # default
//   seed = 1
//   epsilon = 0.01       # gcmg only
//   n_speculators = 63   # gcmg only
//   n_producers = 127    # gcmg only

inline std::string serialize_game_config(const GameConfig& cfg) {
    std::ostringstream out;
    out << "kind = " << to_string(cfg.kind) << "\n";
    out << "n = " << cfg.n << "\n";
    if (cfg.m) out << "m = " << *cfg.m << "\n";
    out << "p = " << cfg.p << "\n";
    out << "gamma = " << cfg.gamma << "\n";
    out << "w = " << cfg.w << "\n";
    out << "seed = " << cfg.seed << "\n";
    if (cfg.kind == GameKind::gcmg) {
        out << "epsilon = " << cfg.epsilon << "\n";
        out << "n_speculators = " << cfg.n_speculators << "\n";
        out << "n_producers = " << cfg.n_producers << "\n";
    }
    return out.str();
}

inline GameConfig parse_game_config(std::istream& in) {
    GameConfig cfg;
    bool p_given = false;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "kind") cfg.kind = game_kind_from_string(value);
            else if (key == "n") cfg.n = std::stoi(value);
            else if (key == "p") { cfg.p = std::stoi(value); p_given = true; }
            else if (key == "m") cfg.m = std::stoi(value);
            else if (key == "gamma") cfg.gamma = std::stod(value);
            else if (key == "w") cfg.w = std::stod(value);
            else if (key == "seed") cfg.seed = std::stoull(value);
            else if (key == "epsilon") cfg.epsilon = std::stod(value);
            else if (key == "n_speculators") cfg.n_speculators = std::stoi(value);
            else if (key == "n_producers") cfg.n_producers = std::stoi(value);
            else throw std::invalid_argument("unknown key '" + key + "'");
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": " + e.what());
        } catch (const std::out_of_range&) {
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": value out of range");
        }
    }
    if (cfg.m) {
        if (*cfg.m < 0 || *cfg.m > 30)
            throw std::invalid_argument("config: m out of range [0, 30]");
        if (!p_given) cfg.p = 1 << *cfg.m;
    }
    cfg.validate();
    return cfg;
}

inline GameConfig load_game_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    return parse_game_config(in);
}

inline void save_game_config(const GameConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write config file: " + path);
    out << serialize_game_config(cfg);
}

}  // namespace mgvol
