#pragma once

#include <compare>
#include <cstdlib>

namespace mfns {

/// Integer Fourier mode index on the period-1 torus. Ordering is lexicographic
/// in (k1, k2) and is the canonical storage order everywhere.
struct WaveVector {
    int k1 = 0;
    int k2 = 0;

    friend constexpr bool operator==(const WaveVector&, const WaveVector&) = default;
    friend constexpr auto operator<=>(const WaveVector&, const WaveVector&) = default;

    constexpr WaveVector operator-() const { return {-k1, -k2}; }
    constexpr WaveVector operator+(WaveVector o) const { return {k1 + o.k1, k2 + o.k2}; }
    constexpr WaveVector operator-(WaveVector o) const { return {k1 - o.k1, k2 - o.k2}; }

    constexpr int norm_sq() const { return k1 * k1 + k2 * k2; }
    constexpr int norm_inf() const {
        const int a1 = k1 < 0 ? -k1 : k1;
        const int a2 = k2 < 0 ? -k2 : k2;
        return a1 > a2 ? a1 : a2;
    }

    /// Counter-clockwise quarter turn.
    constexpr WaveVector rot90() const { return {-k2, k1}; }

    /// One representative per ±k pair: k1 > 0, or (k1 == 0 and k2 > 0).
    constexpr bool in_half_lattice() const { return k1 > 0 || (k1 == 0 && k2 > 0); }
};

} // namespace mfns
