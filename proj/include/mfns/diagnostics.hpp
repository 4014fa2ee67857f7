#pragma once

#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace mfns {

/// Per-step observables of an ensemble (or deterministic reference) run.
struct DiagnosticsRecord {
    double t = 0.0;
    double energy_mean = 0.0;
    double enstrophy_mean = 0.0;
    /// max over modes of |ensemble mean of div̂ξ(k)|.
    double max_mode_mean_div = 0.0;
    /// L² norm of the molecular pressure η·div ξ per particle, averaged.
    double mean_pm_norm = 0.0;
    /// Relative L² error of the mean against the comparison target, if any.
    std::optional<double> l2_err_ref;
};

namespace detail {

/// Shortest round-trip-exact decimal form; keeps CSV output byte-stable.
inline std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

inline constexpr const char* diagnostics_csv_header =
    "t,energy_mean,enstrophy_mean,max_mode_mean_div,mean_pm_norm,l2_err_ref";

/// Fixed-schema CSV; the l2_err_ref column is empty when no target is set.
inline void write_diagnostics_csv(std::ostream& os,
                                  const std::vector<DiagnosticsRecord>& records) {
    os << diagnostics_csv_header << "\n";
    for (const auto& r : records) {
        os << detail::fmt_double(r.t) << ',' << detail::fmt_double(r.energy_mean) << ','
           << detail::fmt_double(r.enstrophy_mean) << ','
           << detail::fmt_double(r.max_mode_mean_div) << ','
           << detail::fmt_double(r.mean_pm_norm) << ',';
        if (r.l2_err_ref) os << detail::fmt_double(*r.l2_err_ref);
        os << "\n";
    }
}

} // namespace mfns
