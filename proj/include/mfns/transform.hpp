#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "mfns/constants.hpp"
#include "mfns/errors.hpp"
#include "mfns/spectral_field.hpp"

namespace mfns {

/// Real samples of a scalar function at the uniform nodes x = (j1/n, j2/n),
/// row-major with j1 outermost.
struct PhysicalScalar {
    int resolution = 0;
    std::vector<double> v;

    double& at(int j1, int j2) { return v[static_cast<size_t>(j1) * resolution + j2]; }
    double at(int j1, int j2) const { return v[static_cast<size_t>(j1) * resolution + j2]; }
};

/// Real samples of a vector field; same node layout as PhysicalScalar.
struct PhysicalVector {
    int resolution = 0;
    std::vector<double> x;
    std::vector<double> y;
};

namespace detail {

inline bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

/// Twiddle factors for all butterfly levels of one transform size, laid out
/// level by level (len = 2, 4, ..., n; half-length blocks).
inline std::vector<Cplx> fft_twiddles(int n, int sign) {
    std::vector<Cplx> tw;
    tw.reserve(static_cast<size_t>(n));
    for (int len = 2; len <= n; len <<= 1) {
        const int half = len >> 1;
        const double ang = sign * two_pi / len;
        for (int j = 0; j < half; ++j)
            tw.emplace_back(std::cos(ang * j), std::sin(ang * j));
    }
    return tw;
}

/// In-place radix-2 FFT over a contiguous line, unnormalized.
/// sign = +1 evaluates sum_k a[k] e^{+2πi jk/n} (synthesis), sign = -1 analysis.
inline void fft_line(Cplx* a, int n, const Cplx* tw) {
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j |= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (int len = 2; len <= n; len <<= 1) {
        const int half = len >> 1;
        for (int i = 0; i < n; i += len) {
            for (int j = 0; j < half; ++j) {
                const Cplx u = a[i + j];
                const Cplx v = a[i + j + half] * tw[j];
                a[i + j] = u + v;
                a[i + j + half] = u - v;
            }
        }
        tw += half;
    }
}

/// Unnormalized 2-D FFT on an n×n row-major complex grid.
inline void fft2d(std::vector<Cplx>& a, int n, int sign) {
    const std::vector<Cplx> tw = fft_twiddles(n, sign);
    for (int r = 0; r < n; ++r) fft_line(&a[static_cast<size_t>(r) * n], n, tw.data());
    std::vector<Cplx> col(static_cast<size_t>(n));
    for (int c = 0; c < n; ++c) {
        for (int r = 0; r < n; ++r) col[r] = a[static_cast<size_t>(r) * n + c];
        fft_line(col.data(), n, tw.data());
        for (int r = 0; r < n; ++r) a[static_cast<size_t>(r) * n + c] = col[r];
    }
}

/// Direct separable evaluation of sum_k c(k) e^{+2πi k·j/n} for arbitrary n.
/// Spectral coefficients are read through `get(k)`; used when n is not a
/// power of two. Two-pass: contract k2 against j2, then k1 against j1.
template <class Get>
std::vector<Cplx> modes_to_grid_direct(int k_max, int n, Get&& get) {
    const int side = 2 * k_max + 1;
    std::vector<Cplx> phase(static_cast<size_t>(n) * side);
    for (int j = 0; j < n; ++j)
        for (int k = -k_max; k <= k_max; ++k) {
            const double ang = two_pi * k * j / static_cast<double>(n);
            phase[static_cast<size_t>(j) * side + (k + k_max)] = Cplx(std::cos(ang), std::sin(ang));
        }
    std::vector<Cplx> tmp(static_cast<size_t>(side) * n); // [k1][j2]
    for (int k1 = -k_max; k1 <= k_max; ++k1)
        for (int j2 = 0; j2 < n; ++j2) {
            Cplx s{};
            for (int k2 = -k_max; k2 <= k_max; ++k2)
                s += get(WaveVector{k1, k2}) * phase[static_cast<size_t>(j2) * side + (k2 + k_max)];
            tmp[static_cast<size_t>(k1 + k_max) * n + j2] = s;
        }
    std::vector<Cplx> out(static_cast<size_t>(n) * n);
    for (int j1 = 0; j1 < n; ++j1)
        for (int j2 = 0; j2 < n; ++j2) {
            Cplx s{};
            for (int k1 = -k_max; k1 <= k_max; ++k1)
                s += phase[static_cast<size_t>(j1) * side + (k1 + k_max)] *
                     tmp[static_cast<size_t>(k1 + k_max) * n + j2];
            out[static_cast<size_t>(j1) * n + j2] = s;
        }
    return out;
}

/// Direct separable quadrature: c(k) = (1/n²) sum_j v(j) e^{-2πi k·j/n}.
inline std::vector<Cplx> grid_to_modes_direct(const std::vector<double>& v, int n, int k_max) {
    const int side = 2 * k_max + 1;
    std::vector<Cplx> phase(static_cast<size_t>(n) * side);
    for (int j = 0; j < n; ++j)
        for (int k = -k_max; k <= k_max; ++k) {
            const double ang = -two_pi * k * j / static_cast<double>(n);
            phase[static_cast<size_t>(j) * side + (k + k_max)] = Cplx(std::cos(ang), std::sin(ang));
        }
    std::vector<Cplx> tmp(static_cast<size_t>(side) * n); // [k2][j1]
    for (int k2 = -k_max; k2 <= k_max; ++k2)
        for (int j1 = 0; j1 < n; ++j1) {
            Cplx s{};
            for (int j2 = 0; j2 < n; ++j2)
                s += v[static_cast<size_t>(j1) * n + j2] *
                     phase[static_cast<size_t>(j2) * side + (k2 + k_max)];
            tmp[static_cast<size_t>(k2 + k_max) * n + j1] = s;
        }
    const double scale = 1.0 / (static_cast<double>(n) * n);
    std::vector<Cplx> out(static_cast<size_t>(side) * side); // [k1][k2]
    for (int k1 = -k_max; k1 <= k_max; ++k1)
        for (int k2 = -k_max; k2 <= k_max; ++k2) {
            Cplx s{};
            for (int j1 = 0; j1 < n; ++j1)
                s += phase[static_cast<size_t>(j1) * side + (k1 + k_max)] *
                     tmp[static_cast<size_t>(k2 + k_max) * n + j1];
            out[static_cast<size_t>(k1 + k_max) * side + (k2 + k_max)] = s * scale;
        }
    return out;
}

inline int wrap_mode(int k, int n) { return k >= 0 ? k : k + n; }

/// Scalar synthesis core shared by the public to_physical overloads.
template <class Get>
std::vector<double> synthesize_scalar(int k_max, int n, Get&& get) {
    std::vector<double> out(static_cast<size_t>(n) * n);
    if (is_pow2(n)) {
        std::vector<Cplx> grid(static_cast<size_t>(n) * n);
        for (int k1 = -k_max; k1 <= k_max; ++k1)
            for (int k2 = -k_max; k2 <= k_max; ++k2)
                grid[static_cast<size_t>(wrap_mode(k1, n)) * n + wrap_mode(k2, n)] =
                    get(WaveVector{k1, k2});
        fft2d(grid, n, +1);
        for (size_t i = 0; i < out.size(); ++i) out[i] = grid[i].real();
    } else {
        auto grid = modes_to_grid_direct(k_max, n, std::forward<Get>(get));
        for (size_t i = 0; i < out.size(); ++i) out[i] = grid[i].real();
    }
    return out;
}

/// Scalar analysis core; no finiteness check (callers validate when needed).
template <class Put>
void analyze_scalar(const std::vector<double>& v, int n, int k_max, Put&& put) {
    if (is_pow2(n)) {
        std::vector<Cplx> grid(v.begin(), v.end());
        fft2d(grid, n, -1);
        const double scale = 1.0 / (static_cast<double>(n) * n);
        for (int k1 = -k_max; k1 <= k_max; ++k1)
            for (int k2 = -k_max; k2 <= k_max; ++k2)
                put(WaveVector{k1, k2},
                    grid[static_cast<size_t>(wrap_mode(k1, n)) * n + wrap_mode(k2, n)] * scale);
    } else {
        auto modes = grid_to_modes_direct(v, n, k_max);
        const int side = 2 * k_max + 1;
        for (int k1 = -k_max; k1 <= k_max; ++k1)
            for (int k2 = -k_max; k2 <= k_max; ++k2)
                put(WaveVector{k1, k2},
                    modes[static_cast<size_t>(k1 + k_max) * side + (k2 + k_max)]);
    }
}

inline void require_resolution(int resolution, int k_max) {
    if (resolution < 2 * k_max + 2)
        throw ConfigError("grid resolution " + std::to_string(resolution) +
                          " too small for truncation " + std::to_string(k_max) +
                          " (need >= 2K+2)");
}

inline void require_finite_samples(const std::vector<double>& v) {
    for (double s : v)
        if (!std::isfinite(s)) throw DataError("non-finite physical sample");
}

inline ScalarField to_spectral_unchecked(const std::vector<double>& v, int n, int k_max) {
    ScalarField f(k_max);
    analyze_scalar(v, n, k_max, [&](WaveVector k, Cplx c) { f[k] = c; });
    hermitian_symmetrize(f);
    return f;
}

inline VectorField to_spectral_unchecked(const PhysicalVector& g, int k_max) {
    VectorField f(k_max);
    analyze_scalar(g.x, g.resolution, k_max, [&](WaveVector k, Cplx c) { f[k].x = c; });
    analyze_scalar(g.y, g.resolution, k_max, [&](WaveVector k, Cplx c) { f[k].y = c; });
    hermitian_symmetrize(f);
    return f;
}

} // namespace detail

/// Smallest power-of-two grid on which quadratic products of two fields of
/// this truncation are alias-free (>= 3K+1 nodes per axis).
inline int product_resolution(int k_max) {
    int n = 1;
    while (n < 3 * k_max + 1 || n < 2 * k_max + 2) n <<= 1;
    return n;
}

inline PhysicalScalar to_physical(const ScalarField& f, int resolution) {
    detail::require_resolution(resolution, f.truncation());
    PhysicalScalar out{resolution, {}};
    out.v = detail::synthesize_scalar(f.truncation(), resolution,
                                      [&](WaveVector k) { return f[k]; });
    return out;
}

inline PhysicalVector to_physical(const VectorField& f, int resolution) {
    detail::require_resolution(resolution, f.truncation());
    PhysicalVector out{resolution, {}, {}};
    out.x = detail::synthesize_scalar(f.truncation(), resolution,
                                      [&](WaveVector k) { return f[k].x; });
    out.y = detail::synthesize_scalar(f.truncation(), resolution,
                                      [&](WaveVector k) { return f[k].y; });
    return out;
}

/// Quadrature projection of real samples onto modes |k|∞ <= k_max; modes
/// beyond the truncation are discarded. The result is exactly Hermitian.
inline ScalarField to_spectral(const PhysicalScalar& g, int k_max) {
    detail::require_resolution(g.resolution, k_max);
    if (g.v.size() != static_cast<size_t>(g.resolution) * g.resolution)
        throw DataError("sample array size does not match resolution");
    detail::require_finite_samples(g.v);
    return detail::to_spectral_unchecked(g.v, g.resolution, k_max);
}

inline VectorField to_spectral(const PhysicalVector& g, int k_max) {
    detail::require_resolution(g.resolution, k_max);
    if (g.x.size() != static_cast<size_t>(g.resolution) * g.resolution ||
        g.y.size() != g.x.size())
        throw DataError("sample array size does not match resolution");
    detail::require_finite_samples(g.x);
    detail::require_finite_samples(g.y);
    return detail::to_spectral_unchecked(g, k_max);
}

} // namespace mfns
