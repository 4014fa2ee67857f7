#pragma once

#include <cmath>
#include <cstdint>

#include "mfns/constants.hpp"

namespace mfns {

namespace detail {

inline constexpr std::uint64_t golden_gamma = 0x9E3779B97F4A7C15ull;

/// splitmix64 finalizer (Stafford mix13 variant used by splitmix64).
inline constexpr std::uint64_t avalanche64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

} // namespace detail

/// splitmix64: state advances by the golden gamma, outputs avalanche(state).
class SplitMix64 {
public:
    explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}

    constexpr std::uint64_t next() {
        state_ += detail::golden_gamma;
        return detail::avalanche64(state_);
    }

private:
    std::uint64_t state_;
};

/// Stream seed for particle `index` under `master`. Documented bit-exactly in
/// the README so runs are reproducible across builds:
///   seed(index) = avalanche64(master + (index + 1) * 0x9E3779B97F4A7C15)
inline constexpr std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t index) {
    return detail::avalanche64(master + (index + 1) * detail::golden_gamma);
}

/// Standard-normal variates: Box-Muller over splitmix64 uniforms, pairs
/// cached. u1 = ((next() >> 11) + 1) · 2⁻⁵³ ∈ (0,1], u2 = (next() >> 11) · 2⁻⁵³.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : gen_(seed) {}

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 =
            static_cast<double>((gen_.next() >> 11) + 1) * 0x1.0p-53;
        const double u2 = static_cast<double>(gen_.next() >> 11) * 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = two_pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    SplitMix64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace mfns
