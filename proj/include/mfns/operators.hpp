#pragma once

#include <cmath>
#include <string>

#include "mfns/constants.hpp"
#include "mfns/errors.hpp"
#include "mfns/spectral_field.hpp"
#include "mfns/transform.hpp"

namespace mfns {

namespace detail {

/// Round to 45 significant bits (Veltkamp split) so that subsequent products
/// with integer wavevector components |k| <= 256 are exact. This is what makes
/// div(helmholtz_project(f)) and helmholtz_project(grad(φ)) coefficientwise
/// zero rather than merely small: both orders of k1·k2·w round the same exact
/// product and cancel bitwise.
inline double round_for_mode_products(double x) {
    constexpr double splitter = 257.0; // 2^8 + 1
    const double t = splitter * x;
    return t - (t - x);
}

inline Cplx round_for_mode_products(Cplx z) {
    return {round_for_mode_products(z.real()), round_for_mode_products(z.imag())};
}

} // namespace detail

/// div f: coefficient at k is 2πi (k · f̂(k)).
inline ScalarField divergence(const VectorField& f) {
    const int K = f.truncation();
    ScalarField d(K);
    for (int k1 = -K; k1 <= K; ++k1)
        for (int k2 = -K; k2 <= K; ++k2) {
            const Vec2c c = f[{k1, k2}];
            const Cplx s = static_cast<double>(k1) * c.x + static_cast<double>(k2) * c.y;
            d[{k1, k2}] = two_pi * Cplx(-s.imag(), s.real());
        }
    return d;
}

/// grad φ: coefficient at k is 2πi k φ̂(k).
inline VectorField grad(const ScalarField& phi) {
    const int K = phi.truncation();
    VectorField g(K);
    for (int k1 = -K; k1 <= K; ++k1)
        for (int k2 = -K; k2 <= K; ++k2) {
            const Cplx p = two_pi * phi[{k1, k2}];
            const Cplx a = detail::round_for_mode_products(Cplx(-p.imag(), p.real()));
            g[{k1, k2}] = {static_cast<double>(k1) * a, static_cast<double>(k2) * a};
        }
    return g;
}

/// Scalar vorticity curl f = ∂₁f₂ − ∂₂f₁.
inline ScalarField curl(const VectorField& f) {
    const int K = f.truncation();
    ScalarField w(K);
    for (int k1 = -K; k1 <= K; ++k1)
        for (int k2 = -K; k2 <= K; ++k2) {
            const Vec2c c = f[{k1, k2}];
            const Cplx s = static_cast<double>(k1) * c.y - static_cast<double>(k2) * c.x;
            w[{k1, k2}] = two_pi * Cplx(-s.imag(), s.real());
        }
    return w;
}

/// Vector Laplacian: mode k scaled by −4π²|k|².
inline VectorField laplacian(const VectorField& f) {
    const int K = f.truncation();
    VectorField out(K);
    for (int k1 = -K; k1 <= K; ++k1)
        for (int k2 = -K; k2 <= K; ++k2) {
            const double lam = -four_pi_sq * static_cast<double>(k1 * k1 + k2 * k2);
            out[{k1, k2}] = f[{k1, k2}] * lam;
        }
    return out;
}

/// ∂_axis f (axis is 1 or 2): mode k scaled by 2πi k_axis.
inline VectorField partial(const VectorField& f, int axis) {
    if (axis != 1 && axis != 2) throw ConfigError("axis must be 1 or 2");
    const int K = f.truncation();
    VectorField out(K);
    for (int k1 = -K; k1 <= K; ++k1)
        for (int k2 = -K; k2 <= K; ++k2) {
            const double m = two_pi * static_cast<double>(axis == 1 ? k1 : k2);
            const Vec2c c = f[{k1, k2}];
            out[{k1, k2}] = {Cplx(-m * c.x.imag(), m * c.x.real()),
                             Cplx(-m * c.y.imag(), m * c.y.real())};
        }
    return out;
}

inline ScalarField partial(const ScalarField& f, int axis) {
    if (axis != 1 && axis != 2) throw ConfigError("axis must be 1 or 2");
    const int K = f.truncation();
    ScalarField out(K);
    for (int k1 = -K; k1 <= K; ++k1)
        for (int k2 = -K; k2 <= K; ++k2) {
            const double m = two_pi * static_cast<double>(axis == 1 ? k1 : k2);
            const Cplx c = f[{k1, k2}];
            out[{k1, k2}] = Cplx(-m * c.imag(), m * c.real());
        }
    return out;
}

/// Leray–Helmholtz projection onto divergence-free fields: per mode k ≠ 0,
/// f̂ ← (I − kkᵀ/|k|²) f̂; the k = 0 mode passes through. The divergence of
/// the result is exactly zero coefficientwise.
inline VectorField helmholtz_project(const VectorField& f) {
    const int K = f.truncation();
    VectorField out(K);
    for (int k1 = -K; k1 <= K; ++k1)
        for (int k2 = -K; k2 <= K; ++k2) {
            const Vec2c c = f[{k1, k2}];
            const int nsq = k1 * k1 + k2 * k2;
            if (nsq == 0) {
                out[{k1, k2}] = c;
                continue;
            }
            // Perpendicular component along (-k2, k1); the parallel part is dropped.
            const Cplx num =
                static_cast<double>(-k2) * c.x + static_cast<double>(k1) * c.y;
            const Cplx w =
                detail::round_for_mode_products(num / static_cast<double>(nsq));
            out[{k1, k2}] = {static_cast<double>(-k2) * w, static_cast<double>(k1) * w};
        }
    return out;
}

/// Scalar potential of the gradient part: φ̂(k) = (k·f̂(k)) / (2πi|k|²), so
/// that f = helmholtz_project(f) + grad(φ) up to round-off.
inline ScalarField gradient_potential(const VectorField& f) {
    const int K = f.truncation();
    ScalarField phi(K);
    for (int k1 = -K; k1 <= K; ++k1)
        for (int k2 = -K; k2 <= K; ++k2) {
            const int nsq = k1 * k1 + k2 * k2;
            if (nsq == 0) continue;
            const Vec2c c = f[{k1, k2}];
            const Cplx s = static_cast<double>(k1) * c.x + static_cast<double>(k2) * c.y;
            const double denom = two_pi * static_cast<double>(nsq);
            phi[{k1, k2}] = Cplx(s.imag() / denom, -s.real() / denom);
        }
    return phi;
}

/// (u·∇)ξ with the advecting velocity already sampled on an alias-free grid
/// (resolution >= 3K+1). Used by the time steppers, which freeze u per step.
inline VectorField advect_on_grid(const PhysicalVector& u_grid, const VectorField& xi) {
    const int K = xi.truncation();
    const int n = u_grid.resolution;
    if (n < 3 * K + 1)
        throw ConfigError("advection grid resolution " + std::to_string(n) +
                          " is below the dealiasing bound 3K+1");
    const PhysicalVector d1 = to_physical(partial(xi, 1), n);
    const PhysicalVector d2 = to_physical(partial(xi, 2), n);
    PhysicalVector r{n, std::vector<double>(static_cast<size_t>(n) * n),
                     std::vector<double>(static_cast<size_t>(n) * n)};
    for (size_t i = 0; i < r.x.size(); ++i) {
        r.x[i] = u_grid.x[i] * d1.x[i] + u_grid.y[i] * d2.x[i];
        r.y[i] = u_grid.x[i] * d1.y[i] + u_grid.y[i] * d2.y[i];
    }
    return detail::to_spectral_unchecked(r, K);
}

/// (u·∇)ξ, pseudo-spectral with zero-padding: the retained modes carry the
/// exact truncated product (no aliasing error).
inline VectorField advect(const VectorField& u, const VectorField& xi) {
    detail::require_same_truncation(u, xi);
    return advect_on_grid(to_physical(u, product_resolution(u.truncation())), xi);
}

/// Pointwise evaluation sum_k f̂(k) e^{2πi k·x}. The imaginary residue must
/// stay below 1e-10 (Hermitian symmetry makes it zero in exact arithmetic);
/// anything larger is an internal consistency failure.
inline Vec2 evaluate_at(const VectorField& f, Vec2 x) {
    const int K = f.truncation();
    double rx = 0.0, ix = 0.0, ry = 0.0, iy = 0.0;
    for (int k1 = -K; k1 <= K; ++k1)
        for (int k2 = -K; k2 <= K; ++k2) {
            const double ang = two_pi * (k1 * x.x + k2 * x.y);
            const double c = std::cos(ang), s = std::sin(ang);
            const Vec2c a = f[{k1, k2}];
            rx += a.x.real() * c - a.x.imag() * s;
            ix += a.x.real() * s + a.x.imag() * c;
            ry += a.y.real() * c - a.y.imag() * s;
            iy += a.y.real() * s + a.y.imag() * c;
        }
    if (std::abs(ix) > 1e-10 || std::abs(iy) > 1e-10)
        throw InternalError("evaluate_at imaginary residue " +
                            std::to_string(std::max(std::abs(ix), std::abs(iy))) +
                            " exceeds 1e-10; field is not Hermitian");
    return {rx, ry};
}

/// L² inner product by Parseval, summed in lexicographic mode order.
inline double inner_product_l2(const VectorField& f, const VectorField& g) {
    detail::require_same_truncation(f, g);
    const int K = f.truncation();
    double acc = 0.0;
    for (int k1 = -K; k1 <= K; ++k1)
        for (int k2 = -K; k2 <= K; ++k2) {
            const Vec2c a = f[{k1, k2}];
            const Vec2c b = g[{k1, k2}];
            acc += a.x.real() * b.x.real() + a.x.imag() * b.x.imag() +
                   a.y.real() * b.y.real() + a.y.imag() * b.y.imag();
        }
    return acc;
}

inline double inner_product_l2(const ScalarField& f, const ScalarField& g) {
    detail::require_same_truncation(f, g);
    const int K = f.truncation();
    double acc = 0.0;
    for (int k1 = -K; k1 <= K; ++k1)
        for (int k2 = -K; k2 <= K; ++k2) {
            const Cplx a = f[{k1, k2}];
            const Cplx b = g[{k1, k2}];
            acc += a.real() * b.real() + a.imag() * b.imag();
        }
    return acc;
}

inline double energy(const VectorField& f) { return 0.5 * inner_product_l2(f, f); }

inline double l2_norm(const VectorField& f) { return std::sqrt(inner_product_l2(f, f)); }
inline double l2_norm(const ScalarField& f) { return std::sqrt(inner_product_l2(f, f)); }

/// Enstrophy ½⟨ω, ω⟩ of the scalar vorticity ω = ∂₁f₂ − ∂₂f₁.
inline double enstrophy(const VectorField& f) {
    const ScalarField w = curl(f);
    return 0.5 * inner_product_l2(w, w);
}

/// ‖a − b‖_L² by Parseval.
inline double l2_error(const VectorField& a, const VectorField& b) {
    detail::require_same_truncation(a, b);
    const int K = a.truncation();
    double acc = 0.0;
    for (int k1 = -K; k1 <= K; ++k1)
        for (int k2 = -K; k2 <= K; ++k2) {
            const Vec2c d = a[{k1, k2}] - b[{k1, k2}];
            acc += d.x.real() * d.x.real() + d.x.imag() * d.x.imag() +
                   d.y.real() * d.y.real() + d.y.imag() * d.y.imag();
        }
    return std::sqrt(acc);
}

/// ‖a − b‖ / ‖b‖, falling back to the absolute error for b = 0.
inline double relative_l2_error(const VectorField& a, const VectorField& b) {
    const double nb = l2_norm(b);
    const double e = l2_error(a, b);
    return nb > 0.0 ? e / nb : e;
}

} // namespace mfns
