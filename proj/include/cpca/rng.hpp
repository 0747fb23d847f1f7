#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace cpca {

// SplitMix64 (Steele/Lea/Flood; Vigna's constants). The state advances by a
// fixed odd gamma, so the generator is counter-like: streams derived with
// derive_seed() never collide with the parent sequence.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform on (0, 1]; never returns 0 so log(u) is finite.
    double uniform01() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

// Stream derivation for pilot/auxiliary chains: hash (seed, stream) through
// one SplitMix64 step each so derived sequences are unrelated to the parent.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    SplitMix64 h(seed ^ (0xD1B54A32D192ED03ULL + stream * 0x8BB84B93962EACC9ULL));
    return h.next_u64();
}

// Gaussian draws via Box-Muller on SplitMix64 uniforms, with the usual
// spare-value cache. Fully specified so trajectories are reproducible
// independent of the standard library's distribution internals.
class GaussianRng {
public:
    explicit GaussianRng(std::uint64_t seed) : u_(seed) {}

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = u_.uniform01();
        const double u2 = u_.uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

    double uniform01() { return u_.uniform01(); }

private:
    SplitMix64 u_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace cpca
