#pragma once

#include <numbers>

namespace mfns {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * pi;
inline constexpr double four_pi_sq = 4.0 * pi * pi;

} // namespace mfns
