/// @file mfns_main.cpp
/// @brief Command-line front end: ensemble runs, the deterministic reference
/// solver, noise-basis verification, snapshot comparison and Monte-Carlo
/// convergence studies.

#include <clocale>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "mfns/harness.hpp"
#include "mfns/meanfield.hpp"
#include "mfns/noise_basis.hpp"
#include "mfns/reference_solver.hpp"
#include "mfns/sim_config.hpp"
#include "mfns/snapshot_io.hpp"

namespace {

using namespace mfns;

std::string fmt(double v) { return detail::fmt_double(v); }

/// Flag values that override config-file keys; flags win when both are given.
struct ConfigOverrides {
    std::string config_path;
    double eta = 0.0, dt = 0.0, horizon = 0.0, nu_override = 0.0;
    int particles = 0, k_field = 0, k_noise = 0;
    std::uint64_t seed = 0;
    std::string scheme, ic;

    CLI::Option* o_eta = nullptr;
    CLI::Option* o_dt = nullptr;
    CLI::Option* o_horizon = nullptr;
    CLI::Option* o_particles = nullptr;
    CLI::Option* o_k_field = nullptr;
    CLI::Option* o_k_noise = nullptr;
    CLI::Option* o_scheme = nullptr;
    CLI::Option* o_seed = nullptr;
    CLI::Option* o_ic = nullptr;
    CLI::Option* o_nu = nullptr;

    void attach(CLI::App* cmd, bool config_required) {
        auto* oc = cmd->add_option("--config", config_path, "key=value configuration file");
        if (config_required) oc->required();
        o_eta = cmd->add_option("--eta", eta, "viscosity (overrides config)");
        o_dt = cmd->add_option("--dt", dt, "time step (overrides config)");
        o_horizon = cmd->add_option("--T", horizon, "final time (overrides config)");
        o_particles = cmd->add_option("--N", particles, "particle count (overrides config)");
        o_k_field = cmd->add_option("--k-field", k_field, "field truncation (overrides config)");
        o_k_noise = cmd->add_option("--k-noise", k_noise, "noise truncation (overrides config)");
        o_scheme = cmd->add_option("--scheme", scheme, "ito-euler or strat-heun");
        o_seed = cmd->add_option("--seed", seed, "master seed (overrides config)");
        o_ic = cmd->add_option("--ic", ic,
                               "taylor-green | random-smooth(seed,slope) | file(path)");
        o_nu = cmd->add_option("--nu-override", nu_override, "explicit noise amplitude");
    }

    SimConfig resolve() const {
        SimConfig cfg = config_path.empty() ? SimConfig{} : parse_config_file(config_path);
        if (*o_eta) cfg.eta = eta;
        if (*o_dt) cfg.dt = dt;
        if (*o_horizon) cfg.horizon = horizon;
        if (*o_particles) cfg.particles = particles;
        if (*o_k_field) cfg.k_field = k_field;
        if (*o_k_noise) cfg.k_noise = k_noise;
        if (*o_scheme) cfg.scheme = parse_scheme(scheme);
        if (*o_seed) cfg.seed = seed;
        if (*o_ic) cfg.ic = parse_initial_condition(ic);
        if (*o_nu) cfg.nu_override = nu_override;
        cfg.validate();
        return cfg;
    }
};

ComparisonTarget parse_target(const std::string& text, int k_field) {
    if (text.empty() || text == "none") return ComparisonTarget::none();
    if (text == "taylor-green") return ComparisonTarget::against_taylor_green();
    if (text == "reference") return ComparisonTarget::against_reference();
    if (text.rfind("file:", 0) == 0) {
        Snapshot snap = read_snapshot(text.substr(5));
        if (snap.field.truncation() != k_field)
            throw ConfigError("comparison snapshot truncation does not match k_field");
        return ComparisonTarget::against_fixed(std::move(snap.field));
    }
    throw ConfigError("unknown comparison target '" + text + "'");
}

void write_csv_file(const std::string& path, const std::vector<DiagnosticsRecord>& records) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    write_diagnostics_csv(os, records);
}

void set_threads(int threads) {
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#else
    (void)threads;
#endif
}

template <class T>
std::vector<T> parse_list(const std::string& text, const char* what) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = detail::trim(item);
        if (item.empty()) continue;
        try {
            if constexpr (std::is_same_v<T, int>)
                out.push_back(std::stoi(item));
            else if constexpr (std::is_same_v<T, double>)
                out.push_back(std::stod(item));
            else
                out.push_back(std::stoull(item));
        } catch (const std::logic_error&) {
            throw ConfigError(std::string("bad ") + what + " list entry '" + item + "'");
        }
    }
    if (out.empty()) throw ConfigError(std::string("empty ") + what + " list");
    return out;
}

int cmd_run(const ConfigOverrides& ov, const std::string& csv_path,
            const std::string& final_snapshot, int snapshot_every,
            const std::string& out_dir, const std::string& error_vs, int threads) {
    set_threads(threads);
    const SimConfig cfg = ov.resolve();
    RunOptions opt;
    opt.target = parse_target(error_vs, cfg.k_field);
    opt.snapshot_every = snapshot_every;
    const RunResult res = run(cfg, opt);

    if (!csv_path.empty()) write_csv_file(csv_path, res.records);
    if (snapshot_every > 0) {
        std::filesystem::create_directories(out_dir);
        for (size_t i = 0; i < res.snapshots.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof name, "mean_%06zu.mfns", i);
            write_snapshot((std::filesystem::path(out_dir) / name).string(),
                           res.snapshots[i].field, res.snapshots[i].time);
        }
    }
    if (!final_snapshot.empty()) write_snapshot(final_snapshot, res.mean, res.final_time);

    const auto& last = res.records.back();
    std::cout << "run complete: t=" << fmt(last.t) << " energy_mean=" << fmt(last.energy_mean)
              << " max_mode_mean_div=" << fmt(last.max_mode_mean_div);
    if (last.l2_err_ref) std::cout << " l2_err_ref=" << fmt(*last.l2_err_ref);
    std::cout << "\n";
    return 0;
}

int cmd_reference(const ConfigOverrides& ov, const std::string& csv_path,
                  const std::string& final_snapshot, int snapshot_every,
                  const std::string& out_dir, const std::string& error_vs) {
    const SimConfig cfg = ov.resolve();
    if (error_vs == "reference")
        throw ConfigError("the reference command cannot compare against itself");
    const ComparisonTarget target = parse_target(error_vs, cfg.k_field);

    const VectorField u0 = make_initial_condition(cfg);
    VorticityState state{0.0, curl(u0)};
    const int steps = cfg.step_count();

    std::vector<DiagnosticsRecord> records;
    std::vector<Snapshot> snapshots;
    auto record_state = [&](const VorticityState& s) {
        const VectorField u = velocity_from_vorticity(s.omega);
        DiagnosticsRecord r;
        r.t = s.t;
        r.energy_mean = energy(u);
        r.enstrophy_mean = enstrophy(u);
        ScalarField d = divergence(u);
        r.max_mode_mean_div = 0.0;
        for (const auto& c : d.coefficients())
            r.max_mode_mean_div = std::max(r.max_mode_mean_div, std::abs(c));
        r.mean_pm_norm = cfg.eta * l2_norm(d);
        switch (target.kind) {
        case ComparisonTarget::Kind::TaylorGreen:
            r.l2_err_ref = relative_l2_error(u, taylor_green(s.t, cfg.eta, cfg.k_field));
            break;
        case ComparisonTarget::Kind::Fixed:
            r.l2_err_ref = relative_l2_error(u, target.fixed);
            break;
        default:
            break;
        }
        records.push_back(r);
        return u;
    };

    record_state(state);
    VectorField u = velocity_from_vorticity(state.omega);
    for (int i = 1; i <= steps; ++i) {
        state = ns_reference_step(state, cfg.eta, cfg.dt);
        u = record_state(state);
        if (snapshot_every > 0 && i % snapshot_every == 0 && i != steps)
            snapshots.push_back({state.t, u});
    }
    snapshots.push_back({state.t, u});

    if (!csv_path.empty()) write_csv_file(csv_path, records);
    if (snapshot_every > 0) {
        std::filesystem::create_directories(out_dir);
        for (size_t i = 0; i < snapshots.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof name, "ref_%06zu.mfns", i);
            write_snapshot((std::filesystem::path(out_dir) / name).string(),
                           snapshots[i].field, snapshots[i].time);
        }
    }
    if (!final_snapshot.empty()) write_snapshot(final_snapshot, u, state.t);

    const auto& last = records.back();
    std::cout << "reference complete: t=" << fmt(last.t) << " energy=" << fmt(last.energy_mean);
    if (last.l2_err_ref) std::cout << " l2_err_ref=" << fmt(*last.l2_err_ref);
    std::cout << "\n";
    return 0;
}

int cmd_basis_check(int k_max) {
    const NoiseBasis basis = build_basis(k_max);
    const auto& elems = basis.elements();

    // Orthonormality by quadrature on an alias-free grid.
    const int R = product_resolution(k_max);
    std::vector<PhysicalVector> grids;
    grids.reserve(elems.size());
    for (const auto& e : elems) grids.push_back(to_physical(element_as_field(e, k_max), R));
    double gram_defect = 0.0;
    for (size_t a = 0; a < elems.size(); ++a)
        for (size_t b = a; b < elems.size(); ++b) {
            double s = 0.0;
            for (size_t i = 0; i < grids[a].x.size(); ++i)
                s += grids[a].x[i] * grids[b].x[i] + grids[a].y[i] * grids[b].y[i];
            s /= static_cast<double>(R) * R;
            gram_defect = std::max(gram_defect, std::abs(s - (a == b ? 1.0 : 0.0)));
        }

    // Self-advection through the general pseudo-spectral product, on a
    // truncation wide enough to keep every product mode.
    double self_adv_defect = 0.0;
    for (const auto& e : elems) {
        const VectorField x = element_as_field(e, 2 * k_max);
        self_adv_defect = std::max(self_adv_defect, l2_norm(advect(x, x)));
    }

    // Covariance identity against c_K Δ on random interior-supported fields.
    const int k_field = k_max + 4;
    GaussianStream g(detail::avalanche64(0xBA515C4Eull));
    double cov_defect = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        VectorField xi(k_field);
        const int interior = k_field - k_max;
        for (int k1 = 0; k1 <= interior; ++k1) {
            const int lo = (k1 == 0) ? 1 : -interior;
            for (int k2 = lo; k2 <= interior; ++k2) {
                const Cplx cx(g.normal(), g.normal());
                const Cplx cy(g.normal(), g.normal());
                xi[{k1, k2}] = {cx, cy};
                xi[{-k1, -k2}] = {std::conj(cx), std::conj(cy)};
            }
        }
        VectorField want = laplacian(xi);
        want *= basis.covariance_constant();
        const double scale = l2_norm(want);
        cov_defect = std::max(cov_defect, l2_error(apply_covariance(basis, xi), want) / scale);
    }

    std::cout << "elements=" << elems.size() << " c_K=" << fmt(basis.covariance_constant())
              << " max_orthonormality_defect=" << fmt(gram_defect)
              << " max_self_advection_defect=" << fmt(self_adv_defect)
              << " max_covariance_defect=" << fmt(cov_defect) << "\n";
    const bool ok = gram_defect <= 1e-12 && self_adv_defect <= 1e-13 && cov_defect <= 1e-10;
    if (!ok) std::cerr << "basis-check: defect above tolerance\n";
    return ok ? 0 : 1;
}

int cmd_compare(const std::string& path_a, const std::string& path_b) {
    const Snapshot a = read_snapshot(path_a);
    const Snapshot b = read_snapshot(path_b);
    const CompareReport rep = compare_snapshots(a, b);
    std::cout << "l2_error=" << fmt(rep.l2_err) << " rel_error=" << fmt(rep.rel_err)
              << " max_mode_dev=" << fmt(rep.max_mode_dev)
              << " energy_diff=" << fmt(rep.energy_diff) << "\n";
    return 0;
}

int cmd_convergence(const ConfigOverrides& ov, const std::string& n_list,
                    const std::string& dt_list, const std::string& seed_list,
                    const std::string& target_text, const std::string& out_path,
                    int threads) {
    set_threads(threads);
    ExperimentPlan plan;
    plan.base = ov.resolve();
    plan.particle_counts = parse_list<int>(n_list, "N");
    plan.dts = dt_list.empty() ? std::vector<double>{plan.base.dt}
                               : parse_list<double>(dt_list, "dt");
    plan.seeds = parse_list<std::uint64_t>(seed_list, "seed");
    plan.target = parse_target(target_text.empty() ? "taylor-green" : target_text,
                               plan.base.k_field);
    const ConvergenceReport report = run_convergence(plan);
    if (out_path.empty()) {
        write_convergence_csv(std::cout, report);
    } else {
        std::ofstream os(out_path);
        if (!os) throw IoError("cannot open '" + out_path + "' for writing");
        write_convergence_csv(os, report);
    }
    summarize_convergence(std::cout, plan, report);
    return report.any_failure ? 2 : 0;
}

int cmd_taylor_green(double time, double eta, int k, const std::string& out) {
    write_snapshot(out, taylor_green(time, eta, k), time);
    std::cout << "wrote " << out << " (t=" << fmt(time) << ", K_f=" << k << ")\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    std::setlocale(LC_ALL, "C");
    CLI::App app{"Stochastic-particle Navier-Stokes simulator on the 2-torus"};
    app.require_subcommand(1);

    // run
    auto* run_cmd = app.add_subcommand("run", "Integrate the particle ensemble");
    ConfigOverrides run_ov;
    run_ov.attach(run_cmd, true);
    std::string run_csv, run_final_snap, run_out_dir = ".", run_error_vs = "none";
    int run_snap_every = 0, run_threads = 0;
    run_cmd->add_option("--csv", run_csv, "write per-step diagnostics CSV here");
    run_cmd->add_option("--final-snapshot", run_final_snap, "write final mean field here");
    run_cmd->add_option("--snapshot-every", run_snap_every,
                        "emit a mean snapshot every M steps (0 = final only)");
    run_cmd->add_option("--out-dir", run_out_dir, "directory for cadence snapshots");
    run_cmd->add_option("--error-vs", run_error_vs,
                        "error column target: none | taylor-green | reference | file:PATH");
    run_cmd->add_option("--threads", run_threads, "worker count (0 = runtime default)");

    // reference
    auto* ref_cmd = app.add_subcommand("reference", "Deterministic vorticity-form solver");
    ConfigOverrides ref_ov;
    ref_ov.attach(ref_cmd, true);
    std::string ref_csv, ref_final_snap, ref_out_dir = ".", ref_error_vs = "none";
    int ref_snap_every = 0;
    ref_cmd->add_option("--csv", ref_csv, "write per-step diagnostics CSV here");
    ref_cmd->add_option("--final-snapshot", ref_final_snap, "write final field here");
    ref_cmd->add_option("--snapshot-every", ref_snap_every,
                        "emit a snapshot every M steps (0 = final only)");
    ref_cmd->add_option("--out-dir", ref_out_dir, "directory for cadence snapshots");
    ref_cmd->add_option("--error-vs", ref_error_vs,
                        "error column target: none | taylor-green | file:PATH");

    // basis-check
    auto* basis_cmd = app.add_subcommand("basis-check", "Verify the noise basis");
    int basis_k = 1;
    basis_cmd->add_option("--k-max", basis_k, "noise truncation K_W")->required();

    // compare
    auto* cmp_cmd = app.add_subcommand("compare", "Compare two MFNS snapshots");
    std::string cmp_a, cmp_b;
    cmp_cmd->add_option("a", cmp_a, "first snapshot")->required();
    cmp_cmd->add_option("b", cmp_b, "second snapshot")->required();

    // convergence
    auto* conv_cmd = app.add_subcommand("convergence", "Monte-Carlo convergence study");
    ConfigOverrides conv_ov;
    conv_ov.attach(conv_cmd, true);
    std::string conv_n, conv_dt, conv_seeds, conv_target = "taylor-green", conv_out;
    int conv_threads = 0;
    conv_cmd->add_option("--N-list", conv_n, "comma-separated ensemble sizes")->required();
    conv_cmd->add_option("--dt-list", conv_dt, "comma-separated time steps (default: config dt)");
    conv_cmd->add_option("--seed-list", conv_seeds, "comma-separated master seeds")->required();
    conv_cmd->add_option("--target", conv_target,
                         "terminal comparison: taylor-green | reference | file:PATH");
    conv_cmd->add_option("--out", conv_out, "report CSV path (default: stdout)");
    conv_cmd->add_option("--threads", conv_threads, "worker count (0 = runtime default)");

    // taylor-green
    auto* tg_cmd = app.add_subcommand("taylor-green", "Write an exact-solution snapshot");
    double tg_time = 0.0, tg_eta = 0.02;
    int tg_k = 8;
    std::string tg_out;
    tg_cmd->add_option("--time", tg_time, "evaluation time");
    tg_cmd->add_option("--eta", tg_eta, "viscosity");
    tg_cmd->add_option("--k", tg_k, "field truncation");
    tg_cmd->add_option("--out", tg_out, "output snapshot path")->required();

    try {
        app.parse(argc, argv);
        if (run_cmd->parsed())
            return cmd_run(run_ov, run_csv, run_final_snap, run_snap_every, run_out_dir,
                           run_error_vs, run_threads);
        if (ref_cmd->parsed())
            return cmd_reference(ref_ov, ref_csv, ref_final_snap, ref_snap_every, ref_out_dir,
                                 ref_error_vs);
        if (basis_cmd->parsed()) return cmd_basis_check(basis_k);
        if (cmp_cmd->parsed()) return cmd_compare(cmp_a, cmp_b);
        if (conv_cmd->parsed())
            return cmd_convergence(conv_ov, conv_n, conv_dt, conv_seeds, conv_target, conv_out,
                                   conv_threads);
        if (tg_cmd->parsed()) return cmd_taylor_green(tg_time, tg_eta, tg_k, tg_out);
        return 1;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const BlowUpError& e) {
        std::cerr << "runtime failure: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime failure: " << e.what() << "\n";
        return 2;
    }
}
