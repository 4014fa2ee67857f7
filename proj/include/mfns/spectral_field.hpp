#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "mfns/errors.hpp"
#include "mfns/wavevector.hpp"

namespace mfns {

using Cplx = std::complex<double>;

/// Real 2-vector (a point on the torus, or a physical velocity sample).
struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

/// Complex 2-vector: one Fourier coefficient of a vector field.
struct Vec2c {
    Cplx x{};
    Cplx y{};

    Vec2c& operator+=(const Vec2c& o) {
        x += o.x;
        y += o.y;
        return *this;
    }
    Vec2c& operator-=(const Vec2c& o) {
        x -= o.x;
        y -= o.y;
        return *this;
    }
    Vec2c& operator*=(double a) {
        x *= a;
        y *= a;
        return *this;
    }
    Vec2c& operator*=(Cplx a) {
        x *= a;
        y *= a;
        return *this;
    }
    friend Vec2c operator+(Vec2c a, const Vec2c& b) { return a += b; }
    friend Vec2c operator-(Vec2c a, const Vec2c& b) { return a -= b; }
    friend Vec2c operator*(Vec2c a, double s) { return a *= s; }
    friend Vec2c operator*(double s, Vec2c a) { return a *= s; }
    friend Vec2c operator*(Vec2c a, Cplx s) { return a *= s; }
    friend Vec2c operator*(Cplx s, Vec2c a) { return a *= s; }
    friend bool operator==(const Vec2c&, const Vec2c&) = default;
};

namespace detail {

/// Truncations are capped so that wavevector components stay below 2^8 and
/// integer-times-coefficient products in the exact projection identities
/// cannot overflow the 45-bit rounding budget (see operators.hpp).
inline int checked_truncation(int k_max) {
    if (k_max < 0) throw ConfigError("field truncation must be >= 0");
    if (k_max > 192) throw ConfigError("field truncation above 192 is not supported");
    return k_max;
}

template <class FieldT>
void require_same_truncation(const FieldT& a, const FieldT& b) {
    if (a.truncation() != b.truncation())
        throw ConfigError("field truncation mismatch: " + std::to_string(a.truncation()) +
                          " vs " + std::to_string(b.truncation()));
}

} // namespace detail

/// Truncated Fourier representation of a real scalar function on the 2-torus.
/// Stores the full square of modes |k1|,|k2| <= K with Hermitian symmetry
/// expected (coeff(-k) = conj(coeff(k))); value semantics throughout.
class ScalarField {
public:
    explicit ScalarField(int truncation)
        : k_max_(detail::checked_truncation(truncation)),
          c_(static_cast<size_t>(side()) * side()) {}

    int truncation() const { return k_max_; }
    int side() const { return 2 * k_max_ + 1; }
    size_t mode_count() const { return c_.size(); }

    bool contains(WaveVector k) const {
        return std::abs(k.k1) <= k_max_ && std::abs(k.k2) <= k_max_;
    }

    Cplx& operator[](WaveVector k) { return c_[index(k)]; }
    const Cplx& operator[](WaveVector k) const { return c_[index(k)]; }
    Cplx coeff_or_zero(WaveVector k) const { return contains(k) ? c_[index(k)] : Cplx{}; }

    std::span<Cplx> coefficients() { return c_; }
    std::span<const Cplx> coefficients() const { return c_; }

    ScalarField& operator+=(const ScalarField& o) {
        detail::require_same_truncation(*this, o);
        for (size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
        return *this;
    }
    ScalarField& operator-=(const ScalarField& o) {
        detail::require_same_truncation(*this, o);
        for (size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
        return *this;
    }
    ScalarField& operator*=(double a) {
        for (auto& c : c_) c *= a;
        return *this;
    }
    /// this += a * o, coefficientwise.
    ScalarField& add_scaled(const ScalarField& o, double a) {
        detail::require_same_truncation(*this, o);
        for (size_t i = 0; i < c_.size(); ++i) c_[i] += a * o.c_[i];
        return *this;
    }

    friend bool operator==(const ScalarField&, const ScalarField&) = default;

private:
    size_t index(WaveVector k) const {
        if (!contains(k)) throw InternalError("wavevector outside field truncation");
        return static_cast<size_t>(k.k1 + k_max_) * side() + (k.k2 + k_max_);
    }

    int k_max_;
    std::vector<Cplx> c_;
};

/// Truncated Fourier representation of a real vector field on the 2-torus.
class VectorField {
public:
    explicit VectorField(int truncation)
        : k_max_(detail::checked_truncation(truncation)),
          c_(static_cast<size_t>(side()) * side()) {}

    int truncation() const { return k_max_; }
    int side() const { return 2 * k_max_ + 1; }
    size_t mode_count() const { return c_.size(); }

    bool contains(WaveVector k) const {
        return std::abs(k.k1) <= k_max_ && std::abs(k.k2) <= k_max_;
    }

    Vec2c& operator[](WaveVector k) { return c_[index(k)]; }
    const Vec2c& operator[](WaveVector k) const { return c_[index(k)]; }
    Vec2c coeff_or_zero(WaveVector k) const { return contains(k) ? c_[index(k)] : Vec2c{}; }

    std::span<Vec2c> coefficients() { return c_; }
    std::span<const Vec2c> coefficients() const { return c_; }

    VectorField& operator+=(const VectorField& o) {
        detail::require_same_truncation(*this, o);
        for (size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
        return *this;
    }
    VectorField& operator-=(const VectorField& o) {
        detail::require_same_truncation(*this, o);
        for (size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
        return *this;
    }
    VectorField& operator*=(double a) {
        for (auto& c : c_) c *= a;
        return *this;
    }
    VectorField& add_scaled(const VectorField& o, double a) {
        detail::require_same_truncation(*this, o);
        for (size_t i = 0; i < c_.size(); ++i) {
            c_[i].x += a * o.c_[i].x;
            c_[i].y += a * o.c_[i].y;
        }
        return *this;
    }
    VectorField& negate() {
        for (auto& c : c_) {
            c.x = -c.x;
            c.y = -c.y;
        }
        return *this;
    }

    friend bool operator==(const VectorField&, const VectorField&) = default;

private:
    size_t index(WaveVector k) const {
        if (!contains(k)) throw InternalError("wavevector outside field truncation");
        return static_cast<size_t>(k.k1 + k_max_) * side() + (k.k2 + k_max_);
    }

    int k_max_;
    std::vector<Vec2c> c_;
};

inline bool all_finite(const ScalarField& f) {
    for (const auto& c : f.coefficients())
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
    return true;
}

inline bool all_finite(const VectorField& f) {
    for (const auto& c : f.coefficients())
        if (!std::isfinite(c.x.real()) || !std::isfinite(c.x.imag()) ||
            !std::isfinite(c.y.real()) || !std::isfinite(c.y.imag()))
            return false;
    return true;
}

/// Average each ±k pair so the field is exactly Hermitian (real-valued in
/// physical space); the k = 0 coefficient is forced real.
inline void hermitian_symmetrize(ScalarField& f) {
    const int K = f.truncation();
    for (int k1 = 0; k1 <= K; ++k1) {
        const int lo = (k1 == 0) ? 1 : -K;
        for (int k2 = lo; k2 <= K; ++k2) {
            const WaveVector k{k1, k2};
            const Cplx m = 0.5 * (f[k] + std::conj(f[-k]));
            f[k] = m;
            f[-k] = std::conj(m);
        }
    }
    f[{0, 0}] = Cplx(f[{0, 0}].real(), 0.0);
}

inline void hermitian_symmetrize(VectorField& f) {
    const int K = f.truncation();
    for (int k1 = 0; k1 <= K; ++k1) {
        const int lo = (k1 == 0) ? 1 : -K;
        for (int k2 = lo; k2 <= K; ++k2) {
            const WaveVector k{k1, k2};
            const Cplx mx = 0.5 * (f[k].x + std::conj(f[-k].x));
            const Cplx my = 0.5 * (f[k].y + std::conj(f[-k].y));
            f[k] = {mx, my};
            f[-k] = {std::conj(mx), std::conj(my)};
        }
    }
    auto& c0 = f[{0, 0}];
    c0 = {Cplx(c0.x.real(), 0.0), Cplx(c0.y.real(), 0.0)};
}

/// Largest |coeff(-k) - conj(coeff(k))| over all modes.
inline double hermitian_defect(const ScalarField& f) {
    const int K = f.truncation();
    double d = 0.0;
    for (int k1 = -K; k1 <= K; ++k1)
        for (int k2 = -K; k2 <= K; ++k2) {
            const WaveVector k{k1, k2};
            d = std::max(d, std::abs(f[-k] - std::conj(f[k])));
        }
    return d;
}

inline double hermitian_defect(const VectorField& f) {
    const int K = f.truncation();
    double d = 0.0;
    for (int k1 = -K; k1 <= K; ++k1)
        for (int k2 = -K; k2 <= K; ++k2) {
            const WaveVector k{k1, k2};
            d = std::max(d, std::abs(f[-k].x - std::conj(f[k].x)));
            d = std::max(d, std::abs(f[-k].y - std::conj(f[k].y)));
        }
    return d;
}

/// Copy into a new truncation, keeping overlapping modes (embed or truncate).
inline ScalarField resize_truncation(const ScalarField& f, int new_k) {
    ScalarField out(new_k);
    const int K = std::min(f.truncation(), new_k);
    for (int k1 = -K; k1 <= K; ++k1)
        for (int k2 = -K; k2 <= K; ++k2) out[{k1, k2}] = f[{k1, k2}];
    return out;
}

inline VectorField resize_truncation(const VectorField& f, int new_k) {
    VectorField out(new_k);
    const int K = std::min(f.truncation(), new_k);
    for (int k1 = -K; k1 <= K; ++k1)
        for (int k2 = -K; k2 <= K; ++k2) out[{k1, k2}] = f[{k1, k2}];
    return out;
}

} // namespace mfns
