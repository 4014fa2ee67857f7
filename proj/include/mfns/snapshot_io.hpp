#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "mfns/errors.hpp"
#include "mfns/spectral_field.hpp"

namespace mfns {

/// MFNS binary snapshot: magic "MFNS", u32 format version (= 1), u32 dimension
/// (= 2), u32 K_f, f64 time, then for each wavevector in lexicographic order
/// (k1 = −K..K outer, k2 inner) the two components, each as f64 (re, im),
/// components innermost. All fields little-endian.
struct Snapshot {
    double time = 0.0;
    VectorField field{0};
};

namespace detail {

static_assert(std::endian::native == std::endian::little,
              "MFNS snapshot I/O assumes a little-endian host");

inline void put_u32(std::ostream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void put_f64(std::ostream& os, double v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline std::uint32_t get_u32(std::istream& is, const std::string& what) {
    std::uint32_t v = 0;
    if (!is.read(reinterpret_cast<char*>(&v), sizeof v))
        throw IoError("truncated snapshot while reading " + what);
    return v;
}

inline double get_f64(std::istream& is, const std::string& what) {
    double v = 0;
    if (!is.read(reinterpret_cast<char*>(&v), sizeof v))
        throw IoError("truncated snapshot while reading " + what);
    return v;
}

inline constexpr std::uint32_t snapshot_version = 1;

} // namespace detail

inline void write_snapshot(std::ostream& os, const VectorField& f, double time) {
    os.write("MFNS", 4);
    detail::put_u32(os, detail::snapshot_version);
    detail::put_u32(os, 2);
    detail::put_u32(os, static_cast<std::uint32_t>(f.truncation()));
    detail::put_f64(os, time);
    const int K = f.truncation();
    for (int k1 = -K; k1 <= K; ++k1)
        for (int k2 = -K; k2 <= K; ++k2) {
            const Vec2c c = f[{k1, k2}];
            detail::put_f64(os, c.x.real());
            detail::put_f64(os, c.x.imag());
            detail::put_f64(os, c.y.real());
            detail::put_f64(os, c.y.imag());
        }
    if (!os) throw IoError("write failure while emitting snapshot");
}

inline void write_snapshot(const std::string& path, const VectorField& f, double time) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    write_snapshot(os, f, time);
}

inline Snapshot read_snapshot(std::istream& is) {
    char magic[4] = {};
    if (!is.read(magic, 4) || std::memcmp(magic, "MFNS", 4) != 0)
        throw IoError("bad magic bytes: not an MFNS snapshot");
    const std::uint32_t version = detail::get_u32(is, "version");
    if (version != detail::snapshot_version)
        throw IoError("unsupported snapshot version " + std::to_string(version));
    const std::uint32_t dim = detail::get_u32(is, "dimension");
    if (dim != 2) throw IoError("unsupported dimension " + std::to_string(dim));
    const std::uint32_t kf = detail::get_u32(is, "truncation");
    if (kf > 192) throw DataError("snapshot truncation " + std::to_string(kf) + " too large");
    Snapshot snap{detail::get_f64(is, "time"), VectorField(static_cast<int>(kf))};
    const int K = static_cast<int>(kf);
    for (int k1 = -K; k1 <= K; ++k1)
        for (int k2 = -K; k2 <= K; ++k2) {
            const double xr = detail::get_f64(is, "coefficient");
            const double xi = detail::get_f64(is, "coefficient");
            const double yr = detail::get_f64(is, "coefficient");
            const double yi = detail::get_f64(is, "coefficient");
            snap.field[{k1, k2}] = {Cplx(xr, xi), Cplx(yr, yi)};
        }
    if (!all_finite(snap.field)) throw DataError("snapshot contains non-finite coefficients");
    return snap;
}

inline Snapshot read_snapshot(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open snapshot '" + path + "'");
    return read_snapshot(is);
}

} // namespace mfns
