#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mfns/diagnostics.hpp"
#include "mfns/errors.hpp"
#include "mfns/noise_basis.hpp"
#include "mfns/operators.hpp"
#include "mfns/reference_solver.hpp"
#include "mfns/rng.hpp"
#include "mfns/sim_config.hpp"
#include "mfns/snapshot_io.hpp"
#include "mfns/spectral_field.hpp"

namespace mfns {

/// N particle fields coupled only through their empirical mean, plus one
/// independent Gaussian stream per particle. At t = 0 all particles equal u₀.
struct EnsembleState {
    double t = 0.0;
    std::vector<VectorField> particles;
    std::vector<GaussianStream> streams;
};

/// Divergence-free random field: half-lattice modes 0 < |k| <= max(1, K_f/2)
/// with amplitude |k|^slope and complex-Gaussian draws, Helmholtz-projected
/// and normalized to ‖u‖_L² = 1/4.
inline VectorField random_smooth_field(std::uint64_t seed, double slope, int k_field) {
    GaussianStream g(detail::avalanche64(seed));
    const int cutoff = std::max(1, k_field / 2);
    VectorField f(k_field);
    for (int k1 = 0; k1 <= cutoff; ++k1) {
        const int lo = (k1 == 0) ? 1 : -cutoff;
        for (int k2 = lo; k2 <= cutoff; ++k2) {
            const WaveVector k{k1, k2};
            if (k.norm_sq() > cutoff * cutoff) continue;
            const double amp =
                std::pow(static_cast<double>(k.norm_sq()), 0.5 * slope);
            const Cplx cx(amp * g.normal(), amp * g.normal());
            const Cplx cy(amp * g.normal(), amp * g.normal());
            f[k] = {cx, cy};
            f[-k] = {std::conj(cx), std::conj(cy)};
        }
    }
    f = helmholtz_project(f);
    const double nrm = l2_norm(f);
    if (!(nrm > 0.0)) throw InternalError("random-smooth field is identically zero");
    f *= 0.25 / nrm;
    return f;
}

/// Build the configured initial state; always Helmholtz-projected, so
/// div u₀ = 0 holds coefficientwise whatever the source.
inline VectorField make_initial_condition(const SimConfig& cfg) {
    VectorField u0(cfg.k_field);
    switch (cfg.ic.kind) {
    case InitialCondition::Kind::TaylorGreen:
        u0 = taylor_green(0.0, cfg.eta, cfg.k_field);
        break;
    case InitialCondition::Kind::RandomSmooth:
        u0 = random_smooth_field(cfg.ic.seed, cfg.ic.slope, cfg.k_field);
        break;
    case InitialCondition::Kind::File: {
        const Snapshot snap = read_snapshot(cfg.ic.path);
        if (snap.field.truncation() > cfg.k_field)
            throw ConfigError("initial-condition snapshot truncation " +
                              std::to_string(snap.field.truncation()) +
                              " exceeds configured k_field");
        u0 = resize_truncation(snap.field, cfg.k_field);
        break;
    }
    }
    hermitian_symmetrize(u0);
    return helmholtz_project(u0);
}

inline EnsembleState make_ensemble(const SimConfig& cfg, const VectorField& u0) {
    EnsembleState st;
    st.t = 0.0;
    st.particles.assign(static_cast<size_t>(cfg.particles), u0);
    st.streams.reserve(static_cast<size_t>(cfg.particles));
    for (int i = 0; i < cfg.particles; ++i)
        st.streams.emplace_back(derive_stream_seed(cfg.seed, static_cast<std::uint64_t>(i)));
    return st;
}

namespace detail {

inline VectorField pairwise_sum(std::span<const VectorField> fields, size_t lo, size_t n) {
    if (n == 1) return fields[lo];
    const size_t h = n / 2;
    VectorField a = pairwise_sum(fields, lo, h);
    a += pairwise_sum(fields, lo + h, n - h);
    return a;
}

inline VectorField mean_of(std::span<const VectorField> fields) {
    VectorField m = pairwise_sum(fields, 0, fields.size());
    const double n = static_cast<double>(fields.size());
    for (auto& c : m.coefficients()) {
        c.x = {c.x.real() / n, c.x.imag() / n};
        c.y = {c.y.real() / n, c.y.imag() / n};
    }
    return m;
}

} // namespace detail

/// Coefficientwise arithmetic mean in a fixed pairwise tree order; the result
/// does not depend on how many workers updated the particles.
inline VectorField empirical_mean(const EnsembleState& state) {
    if (state.particles.empty()) throw ConfigError("ensemble has no particles");
    return detail::mean_of(state.particles);
}

namespace detail {

inline VectorField drift_strat_on_grid(const VectorField& xi, const PhysicalVector& u_grid,
                                       double eta) {
    VectorField r = helmholtz_project(advect_on_grid(u_grid, xi));
    r.negate(); // −P∇_u ξ
    r.add_scaled(grad(divergence(xi)), -eta);
    return r;
}

/// Ito drift. For the canonical noise amplitude (c_K ν²/2 = η to a few ulps)
/// the viscous pair is assembled through the 2-D identity
/// −η∇div ξ + ηΔξ = η∇⊥(curl ξ), fused with the projected advection into a
/// single quantized perpendicular scalar per mode — that is what makes
/// div(drift_ito) vanish coefficientwise instead of merely to round-off.
/// A non-canonical ν (override) falls back to the literal composition.
inline VectorField drift_ito_on_grid(const VectorField& xi, const PhysicalVector& u_grid,
                                     double eta, double nu, double c_k) {
    const double q = 0.5 * c_k * nu * nu;
    const bool canonical =
        std::abs(q - eta) <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(q, eta);
    if (!canonical) {
        VectorField r = drift_strat_on_grid(xi, u_grid, eta);
        r.add_scaled(laplacian(xi), q);
        return r;
    }
    const VectorField adv = advect_on_grid(u_grid, xi);
    const ScalarField vort = curl(xi);
    const int K = xi.truncation();
    VectorField out(K);
    for (int k1 = -K; k1 <= K; ++k1)
        for (int k2 = -K; k2 <= K; ++k2) {
            const int nsq = k1 * k1 + k2 * k2;
            const Vec2c a = adv[{k1, k2}];
            if (nsq == 0) {
                out[{k1, k2}] = {-a.x, -a.y}; // P is the identity at k = 0
                continue;
            }
            // −P(adv) contributes −w, η∇⊥curl contributes η·2πi·vort̂; both lie
            // along (−k₂, k₁), so one rounded scalar carries the whole mode.
            const Cplx w = (static_cast<double>(-k2) * a.x + static_cast<double>(k1) * a.y) /
                           static_cast<double>(nsq);
            const Cplx v = vort[{k1, k2}];
            const Cplx s = mfns::detail::round_for_mode_products(
                -w + eta * Cplx(-v.imag(), v.real()) * two_pi);
            out[{k1, k2}] = {static_cast<double>(-k2) * s, static_cast<double>(k1) * s};
        }
    return out;
}

} // namespace detail

/// Stratonovich drift −P∇_u ξ − η∇div ξ.
inline VectorField drift_strat(const VectorField& xi, const VectorField& u, double eta) {
    detail::require_same_truncation(xi, u);
    return detail::drift_strat_on_grid(
        xi, to_physical(u, product_resolution(u.truncation())), eta);
}

/// Ito drift −P∇_u ξ − η∇div ξ + (c_K ν²/2)Δξ; with the canonical ν the last
/// term is ηΔξ, and div(drift_ito) vanishes identically.
inline VectorField drift_ito(const VectorField& xi, const VectorField& u, double eta,
                             double nu, double c_k) {
    detail::require_same_truncation(xi, u);
    return detail::drift_ito_on_grid(
        xi, to_physical(u, product_resolution(u.truncation())), eta, nu, c_k);
}

namespace detail {

template <class Body>
void for_each_particle(int n, Body&& body) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < n; ++i) body(i);
}

inline void check_ensemble_finite(const EnsembleState& state) {
    for (size_t i = 0; i < state.particles.size(); ++i)
        if (!all_finite(state.particles[i]))
            throw BlowUpError(state.t, static_cast<int>(i));
}

inline std::vector<double> draw_increments(GaussianStream& stream, size_t count,
                                           double sqrt_dt) {
    std::vector<double> dw(count);
    for (auto& v : dw) v = stream.normal() * sqrt_dt;
    return dw;
}

} // namespace detail

/// Euler–Maruyama step of the Ito form. The empirical mean is frozen over the
/// step; each particle then advances independently on its own noise stream,
/// so the update is embarrassingly parallel and bit-reproducible.
inline void step_em_ito(EnsembleState& state, const SimConfig& cfg, const NoiseBasis& basis) {
    const double c_k = basis.covariance_constant();
    const double nu = cfg.nu(c_k);
    const double sqrt_dt = std::sqrt(cfg.dt);
    const VectorField u = empirical_mean(state);
    const PhysicalVector u_grid = to_physical(u, product_resolution(u.truncation()));
    const int n = static_cast<int>(state.particles.size());
    detail::for_each_particle(n, [&](int i) {
        auto& xi = state.particles[i];
        const auto dw =
            detail::draw_increments(state.streams[i], basis.elements().size(), sqrt_dt);
        const VectorField d = detail::drift_ito_on_grid(xi, u_grid, cfg.eta, nu, c_k);
        const VectorField noise = apply_noise(basis, xi, dw, nu);
        xi.add_scaled(d, cfg.dt);
        xi += noise;
    });
    state.t += cfg.dt;
    detail::check_ensemble_finite(state);
}

/// Stratonovich–Heun predictor-corrector with the same increments in both
/// stages. The corrector re-evaluates the empirical mean at the predictor
/// ensemble (a second synchronization barrier); keeping the mean of stage one
/// would drop the deterministic reduction to first order.
inline void step_heun_strat(EnsembleState& state, const SimConfig& cfg,
                            const NoiseBasis& basis) {
    const double c_k = basis.covariance_constant();
    const double nu = cfg.nu(c_k);
    const double sqrt_dt = std::sqrt(cfg.dt);
    const int n = static_cast<int>(state.particles.size());

    const VectorField u = empirical_mean(state);
    const PhysicalVector u_grid = to_physical(u, product_resolution(u.truncation()));
    std::vector<VectorField> drift1(state.particles.size(), VectorField(cfg.k_field));
    std::vector<VectorField> noise1(state.particles.size(), VectorField(cfg.k_field));
    std::vector<VectorField> predictor = state.particles;
    std::vector<std::vector<double>> dws(state.particles.size());
    detail::for_each_particle(n, [&](int i) {
        const VectorField& xi = state.particles[i];
        dws[i] = detail::draw_increments(state.streams[i], basis.elements().size(), sqrt_dt);
        drift1[i] = detail::drift_strat_on_grid(xi, u_grid, cfg.eta);
        noise1[i] = apply_noise(basis, xi, dws[i], nu);
        predictor[i].add_scaled(drift1[i], cfg.dt);
        predictor[i] += noise1[i];
    });

    const VectorField u_pred = detail::mean_of(predictor);
    const PhysicalVector u_pred_grid =
        to_physical(u_pred, product_resolution(u_pred.truncation()));
    detail::for_each_particle(n, [&](int i) {
        auto& xi = state.particles[i];
        const VectorField d2 = detail::drift_strat_on_grid(predictor[i], u_pred_grid, cfg.eta);
        const VectorField n2 = apply_noise(basis, predictor[i], dws[i], nu);
        xi.add_scaled(drift1[i], 0.5 * cfg.dt);
        xi.add_scaled(d2, 0.5 * cfg.dt);
        xi.add_scaled(noise1[i], 0.5);
        xi.add_scaled(n2, 0.5);
    });
    state.t += cfg.dt;
    detail::check_ensemble_finite(state);
}

inline void step(EnsembleState& state, const SimConfig& cfg, const NoiseBasis& basis) {
    if (cfg.scheme == Scheme::ItoEuler)
        step_em_ito(state, cfg, basis);
    else
        step_heun_strat(state, cfg, basis);
}

/// Per-mode first and second moments of div̂ξ over the ensemble (two-pass).
struct DivergenceStats {
    ScalarField mean;        // ensemble mean of div̂ξ per mode
    std::vector<double> sd;  // sample sd of div̂ξ per mode, same layout
    double max_abs_mean = 0.0;
    WaveVector argmax{0, 0};
    double sd_at_argmax = 0.0;
};

inline DivergenceStats divergence_mode_stats(const EnsembleState& state) {
    const size_t n = state.particles.size();
    if (n == 0) throw ConfigError("ensemble has no particles");
    const int K = state.particles[0].truncation();
    std::vector<ScalarField> divs;
    divs.reserve(n);
    for (const auto& p : state.particles) divs.push_back(divergence(p));

    DivergenceStats st{ScalarField(K), {}, 0.0, {0, 0}, 0.0};
    st.sd.assign(divs[0].mode_count(), 0.0);
    auto mean_c = st.mean.coefficients();
    for (const auto& d : divs) {
        auto dc = d.coefficients();
        for (size_t i = 0; i < dc.size(); ++i) mean_c[i] += dc[i];
    }
    for (auto& c : mean_c) c /= static_cast<double>(n);
    if (n > 1) {
        for (const auto& d : divs) {
            auto dc = d.coefficients();
            for (size_t i = 0; i < dc.size(); ++i) {
                const Cplx dev = dc[i] - mean_c[i];
                st.sd[i] += std::norm(dev);
            }
        }
        for (auto& v : st.sd) v = std::sqrt(v / static_cast<double>(n - 1));
    }
    for (int k1 = -K; k1 <= K; ++k1)
        for (int k2 = -K; k2 <= K; ++k2) {
            const WaveVector k{k1, k2};
            const double a = std::abs(st.mean[k]);
            if (a > st.max_abs_mean) {
                st.max_abs_mean = a;
                st.argmax = k;
                const size_t i = static_cast<size_t>(k1 + K) * (2 * K + 1) + (k2 + K);
                st.sd_at_argmax = st.sd[i];
            }
        }
    return st;
}

/// What the per-step error column is measured against.
struct ComparisonTarget {
    enum class Kind { None, TaylorGreen, Reference, Fixed };

    Kind kind = Kind::None;
    VectorField fixed{0};

    static ComparisonTarget none() { return {}; }
    static ComparisonTarget against_taylor_green() { return {Kind::TaylorGreen, VectorField(0)}; }
    static ComparisonTarget against_reference() { return {Kind::Reference, VectorField(0)}; }
    static ComparisonTarget against_fixed(VectorField f) {
        return {Kind::Fixed, std::move(f)};
    }
};

struct RunOptions {
    /// Steps between mean-field snapshots; 0 keeps only the final one.
    int snapshot_every = 0;
    ComparisonTarget target{};
    /// Called after each diagnostics row (including the t = 0 row).
    std::function<void(const EnsembleState&, const DiagnosticsRecord&)> observer;
};

struct RunResult {
    std::vector<DiagnosticsRecord> records;
    std::vector<Snapshot> snapshots; // cadence snapshots plus the final mean
    VectorField mean{0};             // empirical mean at the final time
    double final_time = 0.0;
};

namespace detail {

class TargetTracker {
public:
    TargetTracker(const ComparisonTarget& target, const SimConfig& cfg,
                  const VectorField& u0)
        : target_(&target), cfg_(&cfg) {
        if (target.kind == ComparisonTarget::Kind::Reference)
            ref_ = VorticityState{0.0, curl(u0)};
        if (target.kind == ComparisonTarget::Kind::Fixed &&
            target.fixed.truncation() != cfg.k_field)
            throw ConfigError("comparison snapshot truncation does not match k_field");
    }

    void advance() {
        if (ref_) *ref_ = ns_reference_step(*ref_, cfg_->eta, cfg_->dt);
    }

    std::optional<double> error_at(double t, const VectorField& mean) const {
        switch (target_->kind) {
        case ComparisonTarget::Kind::None:
            return std::nullopt;
        case ComparisonTarget::Kind::TaylorGreen:
            return relative_l2_error(mean, taylor_green(t, cfg_->eta, cfg_->k_field));
        case ComparisonTarget::Kind::Reference:
            return relative_l2_error(mean, velocity_from_vorticity(ref_->omega));
        case ComparisonTarget::Kind::Fixed:
            return relative_l2_error(mean, target_->fixed);
        }
        return std::nullopt;
    }

private:
    const ComparisonTarget* target_;
    const SimConfig* cfg_;
    std::optional<VorticityState> ref_;
};

inline DiagnosticsRecord make_record(const EnsembleState& state, const VectorField& mean,
                                     double eta, std::optional<double> err) {
    DiagnosticsRecord r;
    r.t = state.t;
    r.energy_mean = energy(mean);
    r.enstrophy_mean = enstrophy(mean);
    r.max_mode_mean_div = divergence_mode_stats(state).max_abs_mean;
    double acc = 0.0;
    for (const auto& p : state.particles) acc += eta * l2_norm(divergence(p));
    r.mean_pm_norm = acc / static_cast<double>(state.particles.size());
    r.l2_err_ref = err;
    return r;
}

} // namespace detail

/// Integrate the configured ensemble to T, emitting one diagnostics row per
/// step (plus the t = 0 baseline) and snapshots at the configured cadence.
inline RunResult run(const SimConfig& cfg, const RunOptions& opt = {}) {
    cfg.validate();
    const NoiseBasis basis = build_basis(cfg.k_noise);
    cfg.nu(basis.covariance_constant()); // canonical-ν consistency check
    const VectorField u0 = make_initial_condition(cfg);
    EnsembleState state = make_ensemble(cfg, u0);
    detail::TargetTracker tracker(opt.target, cfg, u0);
    const int steps = cfg.step_count();

    RunResult result;
    VectorField mean = empirical_mean(state);
    result.records.push_back(
        detail::make_record(state, mean, cfg.eta, tracker.error_at(0.0, mean)));
    if (opt.observer) opt.observer(state, result.records.back());

    for (int i = 1; i <= steps; ++i) {
        step(state, cfg, basis);
        tracker.advance();
        mean = empirical_mean(state);
        result.records.push_back(
            detail::make_record(state, mean, cfg.eta, tracker.error_at(state.t, mean)));
        if (opt.observer) opt.observer(state, result.records.back());
        if (opt.snapshot_every > 0 && i % opt.snapshot_every == 0 && i != steps)
            result.snapshots.push_back({state.t, mean});
    }
    result.snapshots.push_back({state.t, mean});
    result.mean = std::move(mean);
    result.final_time = state.t;
    return result;
}

} // namespace mfns
