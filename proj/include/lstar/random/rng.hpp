#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace lstar {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed of an independent sub-stream. Used to give each role inside a trial
/// (operator, signal, noise, estimator starts) its own generator.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return mix64(seed ^ mix64(stream ^ 0x6a09e667f3bcc909ULL));
}

/// Per-trial seed: seed XOR trial index. Streams are decorrelated by the
/// key mixing inside CounterRng, so adjacent trial seeds are safe.
constexpr std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial) noexcept {
    return seed ^ trial;
}

/// Counter-based 64-bit generator: the i-th output is mix64(key + i * golden),
/// a pure function of (seed, i). Gaussian draws use Box-Muller, both outputs
/// of each pair consumed in order.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) noexcept : key_(mix64(seed)) {}

    std::uint64_t next_u64() noexcept {
        return mix64(key_ + (++counter_) * 0x9e3779b97f4a7c15ULL);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1).
    double uniform_open() noexcept {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_open();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    /// +1 or -1 with equal probability.
    double sign() noexcept { return (next_u64() >> 63) ? 1.0 : -1.0; }

    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace lstar
