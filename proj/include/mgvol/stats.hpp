#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace mgvol {

inline double mean(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("mean: empty sample");
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

// Unbiased sample variance (n-1 denominator).
inline double sample_variance(std::span<const double> xs) {
    if (xs.size() < 2) throw std::invalid_argument("sample_variance: need at least 2 values");
    const double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / static_cast<double>(xs.size() - 1);
}

inline double standard_error(std::span<const double> xs) {
    return std::sqrt(sample_variance(xs) / static_cast<double>(xs.size()));
}

// Standard error of a time average from batch means. The series is split
// into `n_batches` equal batches (a trailing remainder is dropped).
inline double batch_means_stderr(std::span<const double> series, int n_batches = 10) {
    if (n_batches < 2) throw std::invalid_argument("batch_means_stderr: need >= 2 batches");
    const std::size_t batch = series.size() / static_cast<std::size_t>(n_batches);
    if (batch == 0) throw std::invalid_argument("batch_means_stderr: series shorter than batch count");
    std::vector<double> means(static_cast<std::size_t>(n_batches));
    for (int b = 0; b < n_batches; ++b) {
        double s = 0.0;
        for (std::size_t k = 0; k < batch; ++k)
            s += series[static_cast<std::size_t>(b) * batch + k];
        means[static_cast<std::size_t>(b)] = s / static_cast<double>(batch);
    }
    return standard_error(means);
}

// Three-point moving average, defined on interior indices only.
// out[i] corresponds to input index i+1.
inline std::vector<double> moving_average3(std::span<const double> xs) {
    if (xs.size() < 3) return {};
    std::vector<double> out(xs.size() - 2);
    for (std::size_t i = 1; i + 1 < xs.size(); ++i)
        out[i - 1] = (xs[i - 1] + xs[i] + xs[i + 1]) / 3.0;
    return out;
}

}  // namespace mgvol
