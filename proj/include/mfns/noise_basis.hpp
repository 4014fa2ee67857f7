#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "mfns/constants.hpp"
#include "mfns/errors.hpp"
#include "mfns/operators.hpp"
#include "mfns/spectral_field.hpp"

namespace mfns {

/// One member of the orthonormal divergence-free family driving the noise:
/// X(x) = √2 · A · cos(2π k·x) or √2 · A · sin(2π k·x), with A = (−k₂,k₁)/|k|.
/// A ⊥ k makes each element divergence-free and self-transport-free
/// ((X·∇)X = 0 pointwise).
struct BasisElement {
    enum class Phase { Cos, Sin };

    WaveVector k;      // half-lattice representative, 0 < |k| <= K_W
    Vec2 polarization; // unit vector (−k₂, k₁)/|k|
    Phase phase = Phase::Cos;
};

/// Finite orthonormal family over the half-lattice Euclidean ball
/// {0 < |k| <= K_W}, closed under quarter turns modulo sign. That closure is
/// what makes sum_α (X_α·∇)² isotropic, with constant c_K = number of
/// half-lattice wavevectors in the ball.
class NoiseBasis {
public:
    const std::vector<BasisElement>& elements() const { return elements_; }
    int truncation() const { return k_max_; }
    double covariance_constant() const { return c_k_; }

private:
    friend NoiseBasis build_basis(int k_max);

    std::vector<BasisElement> elements_;
    int k_max_ = 0;
    double c_k_ = 0.0;
};

/// Deterministic enumeration: lexicographic in k, cos before sin.
inline NoiseBasis build_basis(int k_max) {
    if (k_max < 1) throw ConfigError("noise truncation must be >= 1");
    NoiseBasis b;
    b.k_max_ = k_max;
    for (int k1 = 0; k1 <= k_max; ++k1) {
        const int lo = (k1 == 0) ? 1 : -k_max;
        for (int k2 = lo; k2 <= k_max; ++k2) {
            const WaveVector k{k1, k2};
            if (k.norm_sq() > k_max * k_max) continue;
            const double norm = std::sqrt(static_cast<double>(k.norm_sq()));
            const Vec2 a{-k2 / norm, k1 / norm};
            b.elements_.push_back({k, a, BasisElement::Phase::Cos});
            b.elements_.push_back({k, a, BasisElement::Phase::Sin});
        }
    }
    b.c_k_ = static_cast<double>(b.elements_.size() / 2);
    return b;
}

/// Spectral representation of a basis element: conjugate modes at ±k with
/// amplitude √2/2 (cos) or ∓i·√2/2 (sin) times the polarization.
inline VectorField element_as_field(const BasisElement& e, int k_field) {
    if (e.k.norm_inf() > k_field)
        throw ConfigError("field truncation too small for basis wavevector");
    VectorField f(k_field);
    const double norm = std::sqrt(static_cast<double>(e.k.norm_sq()));
    const double amp = std::sqrt(2.0) / 2.0 / norm; // folds the 1/|k| of A
    const double p1 = static_cast<double>(-e.k.k2);
    const double p2 = static_cast<double>(e.k.k1);
    if (e.phase == BasisElement::Phase::Cos) {
        f[e.k] = {Cplx(amp * p1, 0.0), Cplx(amp * p2, 0.0)};
        f[-e.k] = {Cplx(amp * p1, 0.0), Cplx(amp * p2, 0.0)};
    } else {
        f[e.k] = {Cplx(0.0, -amp * p1), Cplx(0.0, -amp * p2)};
        f[-e.k] = {Cplx(0.0, amp * p1), Cplx(0.0, amp * p2)};
    }
    return f;
}

namespace detail {

/// Accumulate scale · (X_e·∇)f into `out`. Because X_e has only the two modes
/// ±k, the product is a two-shift stencil and the truncated convolution is
/// exact: out(m) += scale · Σ_{s=±1} mult_s · (A⊥·(m−sk)) · f̂(m−sk), where
/// the dot product is integer arithmetic (A⊥·k = 0 holds exactly).
inline void element_advect_accumulate(const BasisElement& e, const VectorField& f,
                                      Cplx scale, VectorField& out) {
    const int K = out.truncation();
    const int p1 = -e.k.k2;
    const int p2 = e.k.k1;
    const double inv_norm = 1.0 / std::sqrt(static_cast<double>(e.k.norm_sq()));
    // 2πi times the ±k spectral amplitude of X_e (before the 1/|k| factor).
    Cplx mult_plus, mult_minus;
    if (e.phase == BasisElement::Phase::Cos) {
        mult_plus = Cplx(0.0, pi * std::sqrt(2.0));
        mult_minus = mult_plus;
    } else {
        mult_plus = Cplx(pi * std::sqrt(2.0), 0.0);
        mult_minus = -mult_plus;
    }
    for (int m1 = -K; m1 <= K; ++m1)
        for (int m2 = -K; m2 <= K; ++m2) {
            Vec2c acc{};
            for (int s = 0; s < 2; ++s) {
                const int sg = s == 0 ? 1 : -1;
                const WaveVector src{m1 - sg * e.k.k1, m2 - sg * e.k.k2};
                if (!f.contains(src)) continue;
                const int dot = p1 * src.k1 + p2 * src.k2;
                if (dot == 0) continue;
                const Cplx m = (s == 0 ? mult_plus : mult_minus) *
                               (static_cast<double>(dot) * inv_norm);
                acc += m * f[src];
            }
            out[{m1, m2}] += scale * acc;
        }
}

} // namespace detail

/// (X_e·∇)f computed in spectral space, truncated to k_out. Matches the
/// general pseudo-spectral advect(element_as_field(e), f) up to round-off.
inline VectorField element_advect(const BasisElement& e, const VectorField& f, int k_out) {
    VectorField out(k_out);
    detail::element_advect_accumulate(e, f, Cplx(1.0, 0.0), out);
    return out;
}

/// −ν Σ_α (X_α·∇)ξ · ΔW_α, truncated to the truncation of ξ. Increments are
/// consumed in basis order, so the result is independent of any threading.
inline VectorField apply_noise(const NoiseBasis& basis, const VectorField& xi,
                               std::span<const double> increments, double nu) {
    if (increments.size() != basis.elements().size())
        throw ConfigError("increment count " + std::to_string(increments.size()) +
                          " does not match basis size " +
                          std::to_string(basis.elements().size()));
    if (basis.truncation() > xi.truncation())
        throw ConfigError("noise truncation exceeds field truncation");
    VectorField out(xi.truncation());
    for (size_t a = 0; a < increments.size(); ++a)
        detail::element_advect_accumulate(basis.elements()[a], xi,
                                          Cplx(-nu * increments[a], 0.0), out);
    return out;
}

/// Σ_α (X_α·∇)(X_α·∇)ξ with the intermediate product kept on the extended
/// truncation K_f + K_W before the final cut to K_f. On interior modes
/// |m|∞ <= K_f − K_W this equals c_K · Δξ.
inline VectorField apply_covariance(const NoiseBasis& basis, const VectorField& xi) {
    if (basis.truncation() > xi.truncation())
        throw ConfigError("noise truncation exceeds field truncation");
    const int k_ext = xi.truncation() + basis.truncation();
    VectorField out(xi.truncation());
    for (const auto& e : basis.elements()) {
        const VectorField mid = element_advect(e, xi, k_ext);
        detail::element_advect_accumulate(e, mid, Cplx(1.0, 0.0), out);
    }
    return out;
}

} // namespace mfns
