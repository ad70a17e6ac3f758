#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace mgvol {

// SplitMix64, used to expand one root seed into well-separated stream seeds.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
};

// Mixes extra words into a seed. Used for per-(point, seed) run seeds in
// sweeps so that task scheduling never changes what a run draws.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t word) {
    SplitMix64 sm(seed ^ (0xBF58476D1CE4E5B9ULL * (word + 1)));
    sm.next();
    return sm.next();
}

// Deterministic random stream. All conversions from engine output to
// doubles/integers are done from raw bits here, so a given seed produces the
// same sequence on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(SplitMix64(seed).next()) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n). Multiply-shift; bias is O(n/2^64).
    std::uint32_t uniform_below(std::uint32_t n) {
        return static_cast<std::uint32_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // Fair sign draw.
    double sign(double w) { return (next_u64() & 1u) ? w : -w; }

    // Standard normal via Box-Muller; the second value of each pair is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 6.283185307179586476925287 * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Named substreams of one root seed. Each component draws from its own
// stream, so changing how much one component consumes cannot perturb the
// others (e.g. the strategy table stays fixed while the run length changes).
struct RngStreams {
    Rng strategies;
    Rng mu;
    Rng choice;
    Rng wiener;

    explicit RngStreams(std::uint64_t root)
        : strategies(mix_seed(root, 0x7374726174ULL)),
          mu(mix_seed(root, 0x6D75ULL)),
          choice(mix_seed(root, 0x63686F696365ULL)),
          wiener(mix_seed(root, 0x7769656E6572ULL)) {}
};

}  // namespace mgvol
