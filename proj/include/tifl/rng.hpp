#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace tifl {

// Deterministic random source. All draws are derived from the raw mt19937_64
// bit stream with hand-rolled mappings, so sequences are identical across
// standard library implementations (std::uniform_*_distribution is not
// portable). Every stochastic routine in the library takes one of these and
// documents its consumption order.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(mix(seed)) {}
    Rng(std::uint64_t seed, std::uint64_t stream) : engine_(mix(seed + 0x9E3779B97F4A7C15ull * (stream + 1))) {}

    std::uint64_t next_bits() { return engine_(); }

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer on [lo, hi], inclusive. Rejection on a power-of-two
    // mask keeps the draw unbiased.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t range = static_cast<std::uint64_t>(hi - lo);
        if (range == 0) return lo;
        std::uint64_t mask = range;
        mask |= mask >> 1;
        mask |= mask >> 2;
        mask |= mask >> 4;
        mask |= mask >> 8;
        mask |= mask >> 16;
        mask |= mask >> 32;
        std::uint64_t draw;
        do {
            draw = engine_() & mask;
        } while (draw > range);
        return lo + static_cast<std::int64_t>(draw);
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Standard normal via Box-Muller; consumes two uniforms per pair and
    // caches the second value.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 6.283185307179586476925286766559 * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    // In-place Fisher-Yates shuffle, consuming n-1 uniform_int draws.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    // splitmix64 finalizer; decorrelates nearby seeds.
    static std::uint64_t mix(std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ull;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
        return x ^ (x >> 31);
    }

    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace tifl
