#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "mfns/diagnostics.hpp"
#include "mfns/errors.hpp"
#include "mfns/meanfield.hpp"
#include "mfns/sim_config.hpp"
#include "mfns/snapshot_io.hpp"

namespace mfns {

/// A Monte-Carlo convergence study: the base configuration swept over
/// ensemble sizes, time steps and master seeds, each cell compared against a
/// fixed target at the final time.
struct ExperimentPlan {
    SimConfig base;
    std::vector<int> particle_counts;
    std::vector<double> dts;
    std::vector<std::uint64_t> seeds;
    ComparisonTarget target = ComparisonTarget::against_taylor_green();

    void validate() const {
        if (particle_counts.empty()) throw ConfigError("empty N sweep list");
        if (dts.empty()) throw ConfigError("empty dt sweep list");
        if (seeds.empty()) throw ConfigError("empty seed list");
        for (int n : particle_counts)
            if (n < 1) throw ConfigError("N sweep values must be >= 1");
        if (target.kind == ComparisonTarget::Kind::None)
            throw ConfigError("convergence study needs a comparison target");
        for (double dt : dts) {
            SimConfig c = base;
            c.dt = dt;
            c.validate();
        }
    }
};

struct ConvergenceRow {
    int particles = 0;
    double dt = 0.0;
    std::uint64_t seed = 0;
    double error = 0.0; // NaN records a blow-up
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    bool any_failure = false;

    /// Median terminal error over seeds for one (N, dt) cell.
    double median_error(int particles, double dt) const {
        std::vector<double> v;
        for (const auto& r : rows)
            if (r.particles == particles && r.dt == dt && std::isfinite(r.error))
                v.push_back(r.error);
        if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
        std::sort(v.begin(), v.end());
        const size_t n = v.size();
        return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    }

    /// Strictly decreasing medians over ascending N at fixed dt.
    bool monotone_in_particles(const std::vector<int>& ns, double dt) const {
        std::vector<int> sorted = ns;
        std::sort(sorted.begin(), sorted.end());
        double prev = std::numeric_limits<double>::infinity();
        for (int n : sorted) {
            const double m = median_error(n, dt);
            if (!std::isfinite(m) || m >= prev) return false;
            prev = m;
        }
        return true;
    }
};

/// Run every (N, dt, seed) cell; blow-ups become NaN rows, never lost rows.
inline ConvergenceReport run_convergence(const ExperimentPlan& plan) {
    plan.validate();
    ConvergenceReport report;
    for (int n : plan.particle_counts)
        for (double dt : plan.dts)
            for (std::uint64_t seed : plan.seeds) {
                SimConfig cfg = plan.base;
                cfg.particles = n;
                cfg.dt = dt;
                cfg.seed = seed;
                ConvergenceRow row{n, dt, seed, std::numeric_limits<double>::quiet_NaN()};
                try {
                    RunOptions opt;
                    opt.target = plan.target;
                    const RunResult res = run(cfg, opt);
                    row.error = res.records.back().l2_err_ref.value();
                } catch (const BlowUpError&) {
                    report.any_failure = true;
                }
                report.rows.push_back(row);
            }
    return report;
}

inline void write_convergence_csv(std::ostream& os, const ConvergenceReport& report) {
    os << "N,dt,seed,error\n";
    for (const auto& r : report.rows)
        os << r.particles << ',' << detail::fmt_double(r.dt) << ',' << r.seed << ','
           << detail::fmt_double(r.error) << "\n";
}

/// Human-readable trend summary: medians over N per dt plus the monotone flag.
inline void summarize_convergence(std::ostream& os, const ExperimentPlan& plan,
                                  const ConvergenceReport& report) {
    std::vector<int> ns = plan.particle_counts;
    std::sort(ns.begin(), ns.end());
    for (double dt : plan.dts) {
        os << "dt=" << detail::fmt_double(dt) << ":";
        for (int n : ns)
            os << " median(N=" << n << ")=" << detail::fmt_double(report.median_error(n, dt));
        os << " monotone=" << (report.monotone_in_particles(ns, dt) ? "yes" : "no") << "\n";
    }
}

struct CompareReport {
    double l2_err = 0.0;
    double rel_err = 0.0;
    double max_mode_dev = 0.0;
    double energy_diff = 0.0;
};

/// Mode-by-mode comparison of two snapshots with equal truncation.
inline CompareReport compare_snapshots(const Snapshot& a, const Snapshot& b) {
    if (a.field.truncation() != b.field.truncation())
        throw ConfigError("snapshot truncations differ: " +
                          std::to_string(a.field.truncation()) + " vs " +
                          std::to_string(b.field.truncation()));
    CompareReport rep;
    rep.l2_err = l2_error(a.field, b.field);
    rep.rel_err = relative_l2_error(a.field, b.field);
    const int K = a.field.truncation();
    for (int k1 = -K; k1 <= K; ++k1)
        for (int k2 = -K; k2 <= K; ++k2) {
            const Vec2c d = a.field[{k1, k2}] - b.field[{k1, k2}];
            rep.max_mode_dev = std::max({rep.max_mode_dev, std::abs(d.x), std::abs(d.y)});
        }
    rep.energy_diff = std::abs(energy(a.field) - energy(b.field));
    return rep;
}

} // namespace mfns
