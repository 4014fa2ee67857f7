/// @file test_support.hpp
/// @brief Shared generators and independent oracles for the test suites.
///
/// Everything here is deliberately implemented without touching the library's
/// production code paths where it serves as an oracle: the convolution
/// advection is a direct O(K⁴) mode-pair sum, and closed-form fields are
/// sampled pointwise on the grid.

#pragma once

#include <cmath>
#include <functional>

#include "mfns/constants.hpp"
#include "mfns/operators.hpp"
#include "mfns/rng.hpp"
#include "mfns/spectral_field.hpp"
#include "mfns/transform.hpp"

namespace mfns::test {

inline ScalarField random_scalar_field(std::uint64_t seed, int k_max, double amp = 1.0) {
    GaussianStream g(detail::avalanche64(seed));
    ScalarField f(k_max);
    for (int k1 = 0; k1 <= k_max; ++k1) {
        const int lo = (k1 == 0) ? 1 : -k_max;
        for (int k2 = lo; k2 <= k_max; ++k2) {
            const Cplx c(amp * g.normal(), amp * g.normal());
            f[{k1, k2}] = c;
            f[{-k1, -k2}] = std::conj(c);
        }
    }
    f[{0, 0}] = Cplx(amp * g.normal(), 0.0);
    return f;
}

/// Hermitian random vector field supported on |k|∞ <= support (default: full).
inline VectorField random_vector_field(std::uint64_t seed, int k_max, int support = -1,
                                       double amp = 1.0) {
    if (support < 0) support = k_max;
    GaussianStream g(detail::avalanche64(seed));
    VectorField f(k_max);
    for (int k1 = 0; k1 <= support; ++k1) {
        const int lo = (k1 == 0) ? 1 : -support;
        for (int k2 = lo; k2 <= support; ++k2) {
            const Cplx cx(amp * g.normal(), amp * g.normal());
            const Cplx cy(amp * g.normal(), amp * g.normal());
            f[{k1, k2}] = {cx, cy};
            f[{-k1, -k2}] = {std::conj(cx), std::conj(cy)};
        }
    }
    f[{0, 0}] = {Cplx(amp * g.normal(), 0.0), Cplx(amp * g.normal(), 0.0)};
    return f;
}

inline VectorField random_divfree_field(std::uint64_t seed, int k_max, int support = -1,
                                        double amp = 1.0) {
    return helmholtz_project(random_vector_field(seed, k_max, support, amp));
}

/// Independent advection oracle: direct truncated convolution
/// result(m) = Σ_{p+q=m} û_j(p) · 2πi q_j · ξ̂_j... summed over all mode pairs.
/// O(K⁴); only usable at small truncation, which is the point.
inline VectorField advect_by_convolution(const VectorField& u, const VectorField& xi) {
    const int K = u.truncation();
    VectorField out(K);
    for (int m1 = -K; m1 <= K; ++m1)
        for (int m2 = -K; m2 <= K; ++m2) {
            Vec2c acc{};
            for (int p1 = -K; p1 <= K; ++p1)
                for (int p2 = -K; p2 <= K; ++p2) {
                    const WaveVector q{m1 - p1, m2 - p2};
                    if (!xi.contains(q)) continue;
                    const Vec2c uc = u[{p1, p2}];
                    const Vec2c xc = xi[q];
                    const Cplx iq1(0.0, two_pi * q.k1);
                    const Cplx iq2(0.0, two_pi * q.k2);
                    acc.x += uc.x * (iq1 * xc.x) + uc.y * (iq2 * xc.x);
                    acc.y += uc.x * (iq1 * xc.y) + uc.y * (iq2 * xc.y);
                }
            out[{m1, m2}] = acc;
        }
    return out;
}

/// Sample a closed-form vector field on the uniform grid.
inline PhysicalVector sample_on_grid(const std::function<Vec2(double, double)>& f, int n) {
    PhysicalVector g{n, std::vector<double>(static_cast<size_t>(n) * n),
                     std::vector<double>(static_cast<size_t>(n) * n)};
    for (int j1 = 0; j1 < n; ++j1)
        for (int j2 = 0; j2 < n; ++j2) {
            const Vec2 v = f(static_cast<double>(j1) / n, static_cast<double>(j2) / n);
            g.x[static_cast<size_t>(j1) * n + j2] = v.x;
            g.y[static_cast<size_t>(j1) * n + j2] = v.y;
        }
    return g;
}

/// doctest's expression decomposition doesn't mix with std::complex under
/// C++20 comparison rewriting; route exact equality through plain bools.
inline bool cx_eq(Cplx a, Cplx b) { return a == b; }

template <class FieldT>
bool bitwise_equal(const FieldT& a, const FieldT& b) {
    return a == b;
}

inline double max_coeff_dev(const VectorField& a, const VectorField& b) {
    const int K = a.truncation();
    double d = 0.0;
    for (int k1 = -K; k1 <= K; ++k1)
        for (int k2 = -K; k2 <= K; ++k2) {
            const Vec2c dd = a[{k1, k2}] - b[{k1, k2}];
            d = std::max({d, std::abs(dd.x), std::abs(dd.y)});
        }
    return d;
}

} // namespace mfns::test
