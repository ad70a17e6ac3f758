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

#include "mgvol/stats.hpp"

namespace mgvol {

struct PhasePoint {
    double control = 0.0;        // alpha (mg) or alpha_ns (gcmg)
    double sigma2_over_n = 0.0;  // volatility order parameter per agent
    double stderr_ = 0.0;
    int n_seeds = 0;
};

struct CriticalPoint {
    bool found = false;
    double control_c = 0.0;
    double sigma_c = 0.0;  // sigma_N at the minimum, sqrt(N * sigma2_over_n)
};

struct PhaseCurve {
    std::vector<PhasePoint> points;  // sorted by control
    CriticalPoint critical;
};

// Detects the volatility minimum as the argmin of a 3-point moving average
// of sigma2_over_n, restricted to interior grid points; ties break toward the
// smaller control. n_at_point gives the agent count per point (one value per
// point, or a single shared value), from which sigma_c is formed out of the
// raw curve value at the detected node. Fewer than 3 points: not found.
inline CriticalPoint detect_critical(std::span<const PhasePoint> points,
                                     std::span<const double> n_at_point) {
    CriticalPoint cp;
    if (points.size() < 3) return cp;
    if (n_at_point.size() != points.size() && n_at_point.size() != 1)
        throw std::invalid_argument("detect_critical: n_at_point size mismatch");

    std::vector<double> per_n(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) per_n[i] = points[i].sigma2_over_n;
    const std::vector<double> smooth = moving_average3(per_n);

    std::size_t best = 0;
    for (std::size_t k = 1; k < smooth.size(); ++k)
        if (smooth[k] < smooth[best]) best = k;
    const std::size_t node = best + 1;  // interior index in the full grid

    const double n_here = n_at_point.size() == 1 ? n_at_point[0] : n_at_point[node];
    cp.found = true;
    cp.control_c = points[node].control;
    cp.sigma_c = std::sqrt(n_here * points[node].sigma2_over_n);
    return cp;
}

inline CriticalPoint detect_critical(std::span<const PhasePoint> points, double n) {
    const double shared[1] = {n};
    return detect_critical(points, std::span<const double>(shared, 1));
}

// --- CSV round trip ---------------------------------------------------------
// Header: control,sigma2_over_N,stderr,n_seeds. Values printed with %.17g so
// a read-back reproduces the doubles bit for bit.

inline std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline void write_phase_curve_csv(const PhaseCurve& curve, std::ostream& out) {
    out << "control,sigma2_over_N,stderr,n_seeds\n";
    for (const auto& p : curve.points)
        out << format_g17(p.control) << ',' << format_g17(p.sigma2_over_n) << ','
            << format_g17(p.stderr_) << ',' << p.n_seeds << '\n';
}

inline void write_phase_curve_csv(const PhaseCurve& curve, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write phase curve: " + path);
    write_phase_curve_csv(curve, out);
}

inline std::vector<PhasePoint> read_phase_curve_points(std::istream& in) {
    std::vector<PhasePoint> points;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("phase curve CSV: empty file");
    if (line.rfind("control,", 0) != 0)
        throw std::runtime_error("phase curve CSV: unexpected header '" + line + "'");
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream row(line);
        PhasePoint p;
        char c1, c2, c3;
        if (!(row >> p.control >> c1 >> p.sigma2_over_n >> c2 >> p.stderr_ >> c3 >> p.n_seeds) ||
            c1 != ',' || c2 != ',' || c3 != ',')
            throw std::runtime_error("phase curve CSV: bad row at line " + std::to_string(line_no));
        points.push_back(p);
    }
    std::sort(points.begin(), points.end(),
              [](const PhasePoint& a, const PhasePoint& b) { return a.control < b.control; });
    return points;
}

inline std::vector<PhasePoint> read_phase_curve_points(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open phase curve: " + path);
    return read_phase_curve_points(in);
}

}  // namespace mgvol
