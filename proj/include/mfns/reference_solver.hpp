#pragma once

#include <cmath>
#include <vector>

#include "mfns/constants.hpp"
#include "mfns/errors.hpp"
#include "mfns/operators.hpp"
#include "mfns/spectral_field.hpp"
#include "mfns/transform.hpp"

namespace mfns {

/// Scalar vorticity ω = ∂₁u₂ − ∂₂u₁ evolved by the deterministic
/// vorticity-streamfunction solver; incompressibility is structural.
struct VorticityState {
    double t = 0.0;
    ScalarField omega;
};

/// Biot–Savart on the torus: û(k) = 2πi (k₂, −k₁) ω̂(k) / (4π²|k|²) for k ≠ 0,
/// zero mean. The result is divergence-free exactly (coefficientwise).
inline VectorField velocity_from_vorticity(const ScalarField& omega) {
    if (std::abs(omega[{0, 0}]) > 1e-12)
        throw DataError("vorticity has a nonzero mean mode");
    const int K = omega.truncation();
    VectorField u(K);
    for (int k1 = -K; k1 <= K; ++k1)
        for (int k2 = -K; k2 <= K; ++k2) {
            const int nsq = k1 * k1 + k2 * k2;
            if (nsq == 0) continue;
            const Cplx w = omega[{k1, k2}];
            // i·ω̂ / (2π|k|²), rounded so the integer products below are exact.
            const double denom = two_pi * static_cast<double>(nsq);
            const Cplx t = detail::round_for_mode_products(
                Cplx(-w.imag() / denom, w.real() / denom));
            u[{k1, k2}] = {static_cast<double>(k2) * t, static_cast<double>(-k1) * t};
        }
    return u;
}

namespace detail {

/// −(u·∇)ω with dealiased grid products; the mean mode is pinned to zero
/// (exact for divergence-free u, and required so ω̂(0) is conserved exactly).
inline ScalarField vorticity_rhs(const ScalarField& omega, int resolution) {
    const VectorField u = velocity_from_vorticity(omega);
    const PhysicalVector ug = to_physical(u, resolution);
    const PhysicalScalar d1 = to_physical(partial(omega, 1), resolution);
    const PhysicalScalar d2 = to_physical(partial(omega, 2), resolution);
    std::vector<double> n(ug.x.size());
    for (size_t i = 0; i < n.size(); ++i)
        n[i] = -(ug.x[i] * d1.v[i] + ug.y[i] * d2.v[i]);
    ScalarField rhs = to_spectral_unchecked(n, resolution, omega.truncation());
    rhs[{0, 0}] = Cplx{};
    return rhs;
}

inline ScalarField apply_mode_factors(const ScalarField& f, const std::vector<double>& fac) {
    ScalarField out(f.truncation());
    auto in = f.coefficients();
    auto o = out.coefficients();
    for (size_t i = 0; i < in.size(); ++i) o[i] = in[i] * fac[i];
    return out;
}

} // namespace detail

/// One integrating-factor RK4 step of ω_t = −u·∇ω + ηΔω. The stiff viscous
/// part is handled exactly by e^{−4π²|k|²η dt}; only the advection is
/// integrated by RK4, so Taylor–Green (where u·∇ω ≡ 0) is evolved exactly.
inline VorticityState ns_reference_step(const VorticityState& state, double eta, double dt) {
    const int K = state.omega.truncation();
    const int R = product_resolution(K);
    const int side = 2 * K + 1;
    std::vector<double> e_full(static_cast<size_t>(side) * side);
    std::vector<double> e_half(e_full.size());
    for (int k1 = -K; k1 <= K; ++k1)
        for (int k2 = -K; k2 <= K; ++k2) {
            const double lam = -four_pi_sq * static_cast<double>(k1 * k1 + k2 * k2) * eta;
            const size_t i = static_cast<size_t>(k1 + K) * side + (k2 + K);
            e_full[i] = std::exp(lam * dt);
            e_half[i] = std::exp(lam * dt * 0.5);
        }

    const ScalarField& w = state.omega;
    const ScalarField n1 = detail::vorticity_rhs(w, R);

    ScalarField arg2 = detail::apply_mode_factors(w, e_half);
    arg2.add_scaled(detail::apply_mode_factors(n1, e_half), 0.5 * dt);
    const ScalarField n2 = detail::vorticity_rhs(arg2, R);

    ScalarField arg3 = detail::apply_mode_factors(w, e_half);
    arg3.add_scaled(n2, 0.5 * dt);
    const ScalarField n3 = detail::vorticity_rhs(arg3, R);

    ScalarField arg4 = detail::apply_mode_factors(w, e_full);
    arg4.add_scaled(detail::apply_mode_factors(n3, e_half), dt);
    const ScalarField n4 = detail::vorticity_rhs(arg4, R);

    ScalarField next = detail::apply_mode_factors(w, e_full);
    next.add_scaled(detail::apply_mode_factors(n1, e_full), dt / 6.0);
    next.add_scaled(detail::apply_mode_factors(n2, e_half), dt / 3.0);
    next.add_scaled(detail::apply_mode_factors(n3, e_half), dt / 3.0);
    next.add_scaled(n4, dt / 6.0);

    VorticityState out{state.t + dt, std::move(next)};
    if (!all_finite(out.omega)) throw BlowUpError(out.t, -1);
    return out;
}

/// Exact decaying vortex u(t,x,y) = (sin2πx cos2πy, −cos2πx sin2πy) e^{−8π²ηt},
/// as a spectral field; the primary analytic oracle.
inline VectorField taylor_green(double t, double eta, int k_field) {
    if (k_field < 1) throw ConfigError("Taylor-Green needs truncation >= 1");
    VectorField u(k_field);
    const double a = 0.25 * std::exp(-8.0 * pi * pi * eta * t);
    const Cplx ip(0.0, a);  //  i·a
    const Cplx im(0.0, -a); // −i·a
    u[{1, 1}] = {im, ip};
    u[{1, -1}] = {im, im};
    u[{-1, 1}] = {ip, ip};
    u[{-1, -1}] = {ip, im};
    return u;
}

} // namespace mfns
