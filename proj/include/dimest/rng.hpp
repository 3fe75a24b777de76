#pragma once

#include <cmath>
#include <cstdint>

namespace dimest {

// SplitMix64 (Steele, Lea, Flood). Small, fast, and splittable: independent
// streams are derived by jumping the state by a multiple of the golden gamma,
// so task results never depend on scheduling or on how many draws a sibling
// task consumed.
class Rng {
public:
    static constexpr std::uint64_t GOLDEN = 0x9E3779B97F4A7C15ull;

    explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

    static std::uint64_t mix(std::uint64_t z) {
        z += GOLDEN;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Stream for task `index` under a master seed. index 0 is distinct from
    // the master stream itself.
    static Rng stream(std::uint64_t master, std::uint64_t index) {
        return Rng(master + GOLDEN * (index + 1));
    }

    std::uint64_t next_u64() {
        state_ += GOLDEN;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // uniform on [0, 1), 53 usable bits
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform on (0, 1], safe under log()
    double uniform_pos() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller; one fresh pair of uniforms per call keeps streams
    // position-independent (no cached spare).
    double normal() {
        double u1 = uniform_pos();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    // integer in [0, n)
    std::uint64_t below(std::uint64_t n) {
        // multiply-shift; bias is negligible for the n used here (< 2^32)
        return static_cast<std::uint64_t>((static_cast<__uint128_t>(next_u64()) * n) >> 64);
    }

private:
    std::uint64_t state_;
};

} // namespace dimest
