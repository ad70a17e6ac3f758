#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace mgvol {

// Dense square matrix, row-major.
class Matrix {
public:
    Matrix() = default;
    explicit Matrix(int n) : n_(n), v_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0) {}

    int size() const { return n_; }
    double& operator()(int i, int j) { return v_[idx(i, j)]; }
    double operator()(int i, int j) const { return v_[idx(i, j)]; }
    std::span<const double> row(int i) const { return {v_.data() + idx(i, 0), static_cast<std::size_t>(n_)}; }

    Matrix scaled(double s) const {
        Matrix out = *this;
        for (double& x : out.v_) x *= s;
        return out;
    }

    double max_abs_diff(const Matrix& other) const {
        double m = 0.0;
        for (std::size_t k = 0; k < v_.size(); ++k)
            m = std::max(m, std::abs(v_[k] - other.v_[k]));
        return m;
    }

    double max_diagonal() const {
        double m = 0.0;
        for (int i = 0; i < n_; ++i) m = std::max(m, (*this)(i, i));
        return m;
    }

private:
    std::size_t idx(int i, int j) const {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j);
    }

    int n_ = 0;
    std::vector<double> v_;
};

inline std::vector<double> matvec(const Matrix& m, std::span<const double> x) {
    const int n = m.size();
    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        auto r = m.row(i);
        for (int j = 0; j < n; ++j) s += r[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(i)] = s;
    }
    return out;
}

inline Matrix mat_mul_transposed(const Matrix& l) {
    const int n = l.size();
    Matrix out(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += l(i, k) * l(j, k);
            out(i, j) = s;
            out(j, i) = s;
        }
    return out;
}

// Cholesky-type factorization for positive semidefinite matrices:
// returns lower-triangular L with L L' ~= m. Exact zero modes (e.g. agents
// whose two strategies coincide) get zero pivots and zero columns. If the
// matrix is indefinite beyond rounding, a diagonal jitter is escalated up to
// max_rel_jitter * max(diag); past that the conditioning is reported and the
// call fails hard.
inline Matrix cholesky_psd(const Matrix& m, double max_rel_jitter = 1e-6) {
    const int n = m.size();
    const double dmax = m.max_diagonal();
    const double base = dmax > 0.0 ? dmax : 1.0;

    double worst_pivot = 0.0;
    for (double rel_jitter : {0.0, 1e-14, 1e-12, 1e-10, 1e-8, 1e-6}) {
        if (rel_jitter > max_rel_jitter) break;
        const double jitter = rel_jitter * base;
        const double pivot_tol = 1e-12 * base;
        Matrix l(n);
        bool ok = true;
        for (int i = 0; i < n && ok; ++i) {
            for (int j = 0; j <= i; ++j) {
                double s = m(i, j) + (i == j ? jitter : 0.0);
                for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
                if (i == j) {
                    if (s < -pivot_tol) {
                        worst_pivot = std::min(worst_pivot, s);
                        ok = false;
                        break;
                    }
                    l(i, i) = s > pivot_tol ? std::sqrt(s) : 0.0;
                } else {
                    l(i, j) = l(j, j) > 0.0 ? s / l(j, j) : 0.0;
                }
            }
        }
        if (!ok) continue;
        // Accept only if the reconstruction is tight against the input.
        const double err = mat_mul_transposed(l).max_abs_diff(m);
        if (err <= 1e-8 * base) return l;
    }

    std::ostringstream msg;
    msg << "cholesky_psd: covariance factorization failed after jitter escalation to "
        << max_rel_jitter << " relative (n=" << n << ", max diagonal=" << dmax
        << ", worst pivot=" << worst_pivot << ")";
    throw std::runtime_error(msg.str());
}

}  // namespace mgvol
