#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include "mfns/errors.hpp"

namespace mfns {

enum class Scheme { ItoEuler, StratHeun };

inline const char* to_string(Scheme s) {
    return s == Scheme::ItoEuler ? "ito-euler" : "strat-heun";
}

inline Scheme parse_scheme(const std::string& s) {
    if (s == "ito-euler") return Scheme::ItoEuler;
    if (s == "strat-heun") return Scheme::StratHeun;
    throw ConfigError("unknown scheme '" + s + "' (expected ito-euler or strat-heun)");
}

/// Initial condition selector. random-smooth draws half-lattice modes
/// 0 < |k| <= max(1, K_f/2) with amplitude |k|^slope from splitmix64(seed),
/// projects, and normalizes to ‖u‖_L² = 1/4. file loads an MFNS snapshot.
/// Every initial condition is Helmholtz-projected at load.
struct InitialCondition {
    enum class Kind { TaylorGreen, RandomSmooth, File };

    Kind kind = Kind::TaylorGreen;
    std::uint64_t seed = 0;
    double slope = -2.0;
    std::string path;

    static InitialCondition taylor_green() { return {}; }
    static InitialCondition random_smooth(std::uint64_t seed, double slope) {
        return {Kind::RandomSmooth, seed, slope, {}};
    }
    static InitialCondition from_file(std::string path) {
        return {Kind::File, 0, 0.0, std::move(path)};
    }
};

inline std::string to_string(const InitialCondition& ic) {
    switch (ic.kind) {
    case InitialCondition::Kind::TaylorGreen:
        return "taylor-green";
    case InitialCondition::Kind::RandomSmooth: {
        std::ostringstream os;
        os << "random-smooth(" << ic.seed << "," << ic.slope << ")";
        return os.str();
    }
    case InitialCondition::Kind::File:
        return "file(" + ic.path + ")";
    }
    return {};
}

inline InitialCondition parse_initial_condition(const std::string& text) {
    if (text == "taylor-green") return InitialCondition::taylor_green();
    const auto open = text.find('(');
    if (open == std::string::npos || text.back() != ')')
        throw ConfigError("bad initial condition '" + text + "'");
    const std::string name = text.substr(0, open);
    const std::string args = text.substr(open + 1, text.size() - open - 2);
    if (name == "file") {
        if (args.empty()) throw ConfigError("file initial condition needs a path");
        return InitialCondition::from_file(args);
    }
    if (name == "random-smooth") {
        const auto comma = args.find(',');
        if (comma == std::string::npos)
            throw ConfigError("random-smooth needs (seed,slope)");
        try {
            const std::uint64_t seed = std::stoull(args.substr(0, comma));
            const double slope = std::stod(args.substr(comma + 1));
            return InitialCondition::random_smooth(seed, slope);
        } catch (const std::logic_error&) {
            throw ConfigError("bad random-smooth arguments '" + args + "'");
        }
    }
    throw ConfigError("unknown initial condition '" + name + "'");
}

/// All physical and numerical parameters of an ensemble run.
struct SimConfig {
    double eta = 0.02;       // viscosity
    double dt = 1e-3;        // time step
    double horizon = 0.25;   // final time T
    int particles = 100;     // ensemble size N
    int k_field = 8;         // field truncation K_f
    int k_noise = 2;         // noise truncation K_W
    Scheme scheme = Scheme::ItoEuler;
    std::uint64_t seed = 1;
    InitialCondition ic{};
    std::optional<double> nu_override; // ν = 0 is the deterministic reduction

    /// Noise amplitude: √(2η/c_K) unless explicitly overridden. The canonical
    /// value makes the Ito correction c_K ν²/2 Δξ equal ηΔξ at the working
    /// truncation; this is asserted to a few ulps.
    double nu(double covariance_constant) const {
        if (nu_override) return *nu_override;
        const double v = std::sqrt(2.0 * eta / covariance_constant);
        const double back = covariance_constant * v * v / 2.0;
        if (std::abs(back - eta) >
            8.0 * std::numeric_limits<double>::epsilon() * std::max(eta, 1e-300))
            throw InternalError("canonical nu does not reproduce eta");
        return v;
    }

    /// Number of fixed steps; horizon must be an integer multiple of dt.
    int step_count() const {
        const double n = horizon / dt;
        const long long r = std::llround(n);
        if (r < 1 || std::abs(n - static_cast<double>(r)) > 1e-9 * std::max(1.0, n))
            throw ConfigError("horizon T must be a positive integer multiple of dt");
        return static_cast<int>(r);
    }

    void validate() const {
        if (!(eta >= 0.0) || !std::isfinite(eta)) throw ConfigError("eta must be >= 0");
        if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be > 0");
        if (!(horizon >= dt)) throw ConfigError("T must be >= dt");
        step_count();
        if (particles < 1) throw ConfigError("N must be >= 1");
        if (k_noise < 1) throw ConfigError("k_noise must be >= 1");
        if (k_field < k_noise) throw ConfigError("k_field must be >= k_noise");
        if (k_field > 64) throw ConfigError("k_field above 64 is not supported");
        if (nu_override && (!(*nu_override >= 0.0) || !std::isfinite(*nu_override)))
            throw ConfigError("nu_override must be >= 0");
        if (ic.kind == InitialCondition::Kind::File && ic.path.empty())
            throw ConfigError("file initial condition needs a path");
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::logic_error&) {
        throw ConfigError("bad numeric value for " + key + ": '" + v + "'");
    }
}

inline long long parse_int(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const long long x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::logic_error&) {
        throw ConfigError("bad integer value for " + key + ": '" + v + "'");
    }
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const std::uint64_t x = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::logic_error&) {
        throw ConfigError("bad seed value for " + key + ": '" + v + "'");
    }
}

} // namespace detail

/// Plain-text key=value configuration. Keys: eta, dt, T, N, k_field, k_noise,
/// scheme, seed, ic, nu_override. '#' starts a comment; unknown keys are
/// rejected so typos cannot silently change an experiment.
inline SimConfig parse_config(std::istream& in) {
    SimConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + " is not key=value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (key == "eta")
            cfg.eta = detail::parse_double(key, val);
        else if (key == "dt")
            cfg.dt = detail::parse_double(key, val);
        else if (key == "T")
            cfg.horizon = detail::parse_double(key, val);
        else if (key == "N")
            cfg.particles = static_cast<int>(detail::parse_int(key, val));
        else if (key == "k_field")
            cfg.k_field = static_cast<int>(detail::parse_int(key, val));
        else if (key == "k_noise")
            cfg.k_noise = static_cast<int>(detail::parse_int(key, val));
        else if (key == "scheme")
            cfg.scheme = parse_scheme(val);
        else if (key == "seed")
            cfg.seed = detail::parse_u64(key, val);
        else if (key == "ic")
            cfg.ic = parse_initial_condition(val);
        else if (key == "nu_override")
            cfg.nu_override = detail::parse_double(key, val);
        else
            throw ConfigError("unknown config key '" + key + "' on line " +
                              std::to_string(lineno));
    }
    return cfg;
}

inline SimConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    return parse_config(in);
}

inline std::string format_config(const SimConfig& cfg) {
    std::ostringstream os;
    os.precision(17);
    os << "eta = " << cfg.eta << "\n"
       << "dt = " << cfg.dt << "\n"
       << "T = " << cfg.horizon << "\n"
       << "N = " << cfg.particles << "\n"
       << "k_field = " << cfg.k_field << "\n"
       << "k_noise = " << cfg.k_noise << "\n"
       << "scheme = " << to_string(cfg.scheme) << "\n"
       << "seed = " << cfg.seed << "\n"
       << "ic = " << to_string(cfg.ic) << "\n";
    if (cfg.nu_override) os << "nu_override = " << *cfg.nu_override << "\n";
    return os.str();
}

} // namespace mfns
