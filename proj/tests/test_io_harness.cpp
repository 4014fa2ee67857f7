/// @file test_io_harness.cpp
/// @brief Snapshot format round trips and fault injection, config parsing,
/// CSV schema stability, convergence-plan plumbing, and the CLI contract
/// (exit codes, file naming) through the real binary.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "mfns/diagnostics.hpp"
#include "mfns/harness.hpp"
#include "mfns/meanfield.hpp"
#include "mfns/sim_config.hpp"
#include "mfns/snapshot_io.hpp"
#include "test_support.hpp"

using namespace mfns;
using namespace mfns::test;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const fs::path d = fs::temp_directory_path() / "mfns_io_tests";
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

/// Run the installed CLI binary; returns its exit code, captures stdout+stderr.
int run_cli(const std::string& args, std::string* output = nullptr) {
    const char* exe = std::getenv("MFNS_CLI");
    REQUIRE_MESSAGE(exe != nullptr, "MFNS_CLI must point at the mfns binary");
    const fs::path log = temp_dir() / "cli_output.txt";
    const std::string cmd = std::string(exe) + " " + args + " > " + log.string() + " 2>&1";
    const int raw = std::system(cmd.c_str());
    if (output) *output = slurp(log);
    return WEXITSTATUS(raw);
}

} // namespace

TEST_CASE("snapshot round trip is bit-exact") {
    const fs::path p = temp_dir() / "roundtrip.mfns";
    const VectorField f = random_vector_field(5, 6);
    write_snapshot(p.string(), f, 0.375);
    const Snapshot s = read_snapshot(p.string());
    CHECK(s.time == 0.375);
    CHECK(bitwise_equal(s.field, f));
}

TEST_CASE("snapshot fault injection") {
    const fs::path p = temp_dir() / "victim.mfns";
    write_snapshot(p.string(), random_vector_field(1, 3), 0.0);

    SUBCASE("corrupt magic bytes") {
        std::string bytes = slurp(p);
        bytes[0] = 'X';
        std::ofstream(p, std::ios::binary).write(bytes.data(), bytes.size());
        CHECK_THROWS_AS(read_snapshot(p.string()), IoError);
    }
    SUBCASE("truncated payload") {
        std::string bytes = slurp(p);
        bytes.resize(bytes.size() / 2);
        std::ofstream(p, std::ios::binary).write(bytes.data(), bytes.size());
        CHECK_THROWS_AS(read_snapshot(p.string()), IoError);
    }
    SUBCASE("unsupported version") {
        std::string bytes = slurp(p);
        bytes[4] = 9;
        std::ofstream(p, std::ios::binary).write(bytes.data(), bytes.size());
        CHECK_THROWS_AS(read_snapshot(p.string()), IoError);
    }
    SUBCASE("non-finite coefficients") {
        std::string bytes = slurp(p);
        const double bad = std::nan("");
        std::memcpy(bytes.data() + 24, &bad, sizeof bad); // first payload double
        std::ofstream(p, std::ios::binary).write(bytes.data(), bytes.size());
        CHECK_THROWS_AS(read_snapshot(p.string()), DataError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(read_snapshot((temp_dir() / "absent.mfns").string()), IoError);
    }
}

TEST_CASE("config parsing: full file, comments, overrides and rejection") {
    SUBCASE("all keys parse") {
        std::istringstream in(
            "# experiment\n"
            "eta = 0.05\n"
            "dt = 2e-3\n"
            "T = 0.5\n"
            "N = 37\n"
            "k_field = 12\n"
            "k_noise = 3\n"
            "scheme = strat-heun\n"
            "seed = 12345\n"
            "ic = random-smooth(9,-2.5)\n"
            "nu_override = 0\n");
        const SimConfig cfg = parse_config(in);
        cfg.validate();
        CHECK(cfg.eta == 0.05);
        CHECK(cfg.dt == 2e-3);
        CHECK(cfg.horizon == 0.5);
        CHECK(cfg.particles == 37);
        CHECK(cfg.k_field == 12);
        CHECK(cfg.k_noise == 3);
        CHECK(cfg.scheme == Scheme::StratHeun);
        CHECK(cfg.seed == 12345);
        CHECK(cfg.ic.kind == InitialCondition::Kind::RandomSmooth);
        CHECK(cfg.ic.seed == 9);
        CHECK(cfg.ic.slope == -2.5);
        REQUIRE(cfg.nu_override.has_value());
        CHECK(*cfg.nu_override == 0.0);
    }
    SUBCASE("format_config round trips") {
        SimConfig cfg;
        cfg.eta = 0.013;
        cfg.scheme = Scheme::StratHeun;
        cfg.ic = InitialCondition::from_file("state.mfns");
        std::istringstream in(format_config(cfg));
        const SimConfig back = parse_config(in);
        CHECK(back.eta == cfg.eta);
        CHECK(back.scheme == cfg.scheme);
        CHECK(back.ic.kind == InitialCondition::Kind::File);
        CHECK(back.ic.path == "state.mfns");
        CHECK_FALSE(back.nu_override.has_value());
    }
    SUBCASE("unknown keys, bad values and malformed lines are rejected") {
        std::istringstream a("viscosity = 0.1\n");
        CHECK_THROWS_AS(parse_config(a), ConfigError);
        std::istringstream b("eta = squishy\n");
        CHECK_THROWS_AS(parse_config(b), ConfigError);
        std::istringstream c("eta 0.1\n");
        CHECK_THROWS_AS(parse_config(c), ConfigError);
        std::istringstream d("scheme = milstein\n");
        CHECK_THROWS_AS(parse_config(d), ConfigError);
        std::istringstream e("ic = random-smooth(9)\n");
        CHECK_THROWS_AS(parse_config(e), ConfigError);
    }
    SUBCASE("missing config file error names the file") {
        try {
            parse_config_file("no_such_config.cfg");
            FAIL("expected IoError");
        } catch (const IoError& e) {
            CHECK(std::string(e.what()).find("no_such_config.cfg") != std::string::npos);
        }
    }
}

TEST_CASE("diagnostics CSV schema is fixed and stable") {
    std::vector<DiagnosticsRecord> recs(2);
    recs[0].t = 0.0;
    recs[0].energy_mean = 0.25;
    recs[1].t = 1e-3;
    recs[1].energy_mean = 0.2499;
    recs[1].l2_err_ref = 0.01;
    std::ostringstream os;
    write_diagnostics_csv(os, recs);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,energy_mean,enstrophy_mean,max_mode_mean_div,mean_pm_norm,l2_err_ref");
    std::getline(in, line);
    CHECK(line.substr(0, 2) == "0,");
    CHECK(line.back() == ','); // no target: trailing empty column
    std::getline(in, line);
    CHECK(line.find("0.01") != std::string::npos);
}

TEST_CASE("compare_snapshots: identical fields and mismatched truncations") {
    const VectorField f = random_divfree_field(4, 5);
    const Snapshot a{0.1, f}, b{0.1, f};
    const CompareReport rep = compare_snapshots(a, b);
    CHECK(rep.l2_err == 0.0);
    CHECK(rep.max_mode_dev == 0.0);
    CHECK(rep.energy_diff == 0.0);

    SUBCASE("projection of a divergence-free field compares equal") {
        const Snapshot c{0.1, helmholtz_project(f)};
        const CompareReport r2 = compare_snapshots(a, c);
        CHECK(r2.l2_err <= 1e-13);
    }
    SUBCASE("truncation mismatch throws") {
        const Snapshot d{0.0, VectorField(4)};
        CHECK_THROWS_AS(compare_snapshots(a, d), ConfigError);
    }
}

TEST_CASE("run_convergence: rows, medians and validation") {
    ExperimentPlan plan;
    plan.base.eta = 0.02;
    plan.base.dt = 5e-3;
    plan.base.horizon = 0.02;
    plan.base.k_field = 4;
    plan.base.k_noise = 1;
    plan.particle_counts = {4, 16};
    plan.dts = {5e-3};
    plan.seeds = {1, 2, 3};
    plan.target = ComparisonTarget::against_taylor_green();

    const ConvergenceReport rep = run_convergence(plan);
    CHECK(rep.rows.size() == 6);
    CHECK_FALSE(rep.any_failure);
    for (const auto& r : rep.rows) CHECK(std::isfinite(r.error));
    const double m4 = rep.median_error(4, 5e-3);
    const double m16 = rep.median_error(16, 5e-3);
    CHECK(std::isfinite(m4));
    CHECK(std::isfinite(m16));

    std::ostringstream os;
    write_convergence_csv(os, rep);
    std::istringstream in(os.str());
    std::string header;
    std::getline(in, header);
    CHECK(header == "N,dt,seed,error");

    SUBCASE("empty sweep lists are rejected") {
        ExperimentPlan bad = plan;
        bad.particle_counts.clear();
        CHECK_THROWS_AS(run_convergence(bad), ConfigError);
        bad = plan;
        bad.seeds.clear();
        CHECK_THROWS_AS(run_convergence(bad), ConfigError);
    }
}

TEST_CASE("run_convergence: deterministic dt sweep decreases the error") {
    // nu = 0 single trajectory against the lockstep oracle: pure scheme error.
    ExperimentPlan plan;
    plan.base.eta = 0.0;
    plan.base.nu_override = 0.0;
    plan.base.horizon = 0.02;
    plan.base.particles = 1;
    plan.base.k_field = 6;
    plan.base.k_noise = 1;
    plan.base.scheme = Scheme::StratHeun;
    plan.base.ic = InitialCondition::random_smooth(4, -2.0);
    plan.particle_counts = {1};
    plan.dts = {2e-3, 1e-3, 5e-4};
    plan.seeds = {1};
    plan.target = ComparisonTarget::against_reference();
    const ConvergenceReport rep = run_convergence(plan);
    REQUIRE(rep.rows.size() == 3);
    const double e1 = rep.median_error(1, 2e-3);
    const double e2 = rep.median_error(1, 1e-3);
    const double e3 = rep.median_error(1, 5e-4);
    CHECK(e1 > e2);
    CHECK(e2 > e3);
    CHECK(e3 > 0.0);
}

TEST_CASE("run_convergence: blow-ups become NaN rows, never lost rows") {
    ExperimentPlan plan;
    plan.base.eta = 1.0;
    plan.base.dt = 1.0; // far beyond the viscous stability limit
    plan.base.horizon = 400.0;
    plan.base.k_field = 4;
    plan.base.k_noise = 1;
    plan.base.ic = InitialCondition::random_smooth(2, -2.0);
    plan.particle_counts = {1, 2};
    plan.dts = {1.0};
    plan.seeds = {3};
    plan.target = ComparisonTarget::against_taylor_green();
    const ConvergenceReport rep = run_convergence(plan);
    REQUIRE(rep.rows.size() == 2);
    CHECK(rep.any_failure);
    for (const auto& r : rep.rows) CHECK(std::isnan(r.error));
    std::ostringstream os;
    write_convergence_csv(os, rep);
    CHECK(os.str().find("nan") != std::string::npos);
}

TEST_CASE("cli: taylor-green, compare and basis-check round trip") {
    const fs::path tg = temp_dir() / "tg.mfns";
    std::string out;
    CHECK(run_cli("taylor-green --time 0 --eta 0.02 --k 8 --out " + tg.string(), &out) == 0);
    const Snapshot snap = read_snapshot(tg.string());
    CHECK(snap.field.truncation() == 8);
    CHECK(energy(snap.field) == doctest::Approx(0.25).epsilon(1e-13));

    CHECK(run_cli("compare " + tg.string() + " " + tg.string(), &out) == 0);
    CHECK(out.find("l2_error=0 ") != std::string::npos);

    CHECK(run_cli("basis-check --k-max 2", &out) == 0);
    CHECK(out.find("c_K=6") != std::string::npos);
    CHECK(out.find("elements=12") != std::string::npos);
}

TEST_CASE("cli: exit codes honor the contract under fault injection") {
    std::string out;
    SUBCASE("missing config file names the file, exit 1") {
        CHECK(run_cli("run --config missing.cfg", &out) == 1);
        CHECK(out.find("missing.cfg") != std::string::npos);
    }
    SUBCASE("unknown subcommand exits 1") { CHECK(run_cli("frobnicate", &out) == 1); }
    SUBCASE("unknown flag exits 1") { CHECK(run_cli("basis-check --k-max 1 --bogus", &out) == 1); }
    SUBCASE("corrupt snapshot exits 1") {
        const fs::path bad = temp_dir() / "bad.mfns";
        std::ofstream(bad, std::ios::binary) << "NOPE";
        CHECK(run_cli("compare " + bad.string() + " " + bad.string(), &out) == 1);
    }
    SUBCASE("compare across truncations exits 1") {
        const fs::path a = temp_dir() / "a8.mfns";
        const fs::path b = temp_dir() / "b6.mfns";
        CHECK(run_cli("taylor-green --time 0 --k 8 --out " + a.string(), &out) == 0);
        CHECK(run_cli("taylor-green --time 0 --k 6 --out " + b.string(), &out) == 0);
        CHECK(run_cli("compare " + a.string() + " " + b.string(), &out) == 1);
    }
    SUBCASE("help exits 0 and documents subcommands") {
        CHECK(run_cli("--help", &out) == 0);
        for (const char* sub :
             {"run", "reference", "basis-check", "compare", "convergence", "taylor-green"})
            CHECK(out.find(sub) != std::string::npos);
    }
}

TEST_CASE("cli: run emits re-readable CSV and snapshot artifacts") {
    const fs::path dir = temp_dir();
    const fs::path cfgp = dir / "small.cfg";
    {
        SimConfig cfg;
        cfg.eta = 0.02;
        cfg.dt = 2e-3;
        cfg.horizon = 0.01;
        cfg.particles = 4;
        cfg.k_field = 4;
        cfg.k_noise = 1;
        cfg.seed = 77;
        std::ofstream(cfgp) << format_config(cfg);
    }
    const fs::path csv = dir / "diag.csv";
    const fs::path snap = dir / "final.mfns";
    std::string out;
    const int rc = run_cli("run --config " + cfgp.string() + " --csv " + csv.string() +
                               " --final-snapshot " + snap.string() + " --error-vs taylor-green",
                           &out);
    CHECK(rc == 0);
    CHECK(out.find("run complete") != std::string::npos);

    const Snapshot s = read_snapshot(snap.string());
    CHECK(s.time == doctest::Approx(0.01).epsilon(1e-12));

    std::ifstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header == diagnostics_csv_header);
    int rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows == 6); // t = 0 plus five steps

    // The emitted config text reloads to the same run (round-trip property).
    const SimConfig reparsed = parse_config_file(cfgp.string());
    CHECK(reparsed.particles == 4);
    CHECK(reparsed.seed == 77);
}

TEST_CASE("cli: reference solver emits the shared formats") {
    const fs::path dir = temp_dir();
    const fs::path cfgp = dir / "ref.cfg";
    {
        SimConfig cfg;
        cfg.eta = 0.02;
        cfg.dt = 1e-3;
        cfg.horizon = 0.01;
        cfg.particles = 1;
        cfg.k_field = 6;
        cfg.k_noise = 1;
        std::ofstream(cfgp) << format_config(cfg);
    }
    const fs::path csv = dir / "ref.csv";
    const fs::path snap = dir / "ref.mfns";
    std::string out;
    const int rc = run_cli("reference --config " + cfgp.string() + " --csv " + csv.string() +
                               " --final-snapshot " + snap.string() + " --error-vs taylor-green",
                           &out);
    CHECK(rc == 0);
    const Snapshot s = read_snapshot(snap.string());
    // Taylor-Green under the oracle: still Taylor-Green, decayed.
    CHECK(relative_l2_error(s.field, taylor_green(0.01, 0.02, 6)) <= 1e-10);
    std::ifstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header == diagnostics_csv_header);
}

TEST_CASE("cli: snapshot cadence emits numbered, re-readable files") {
    const fs::path dir = temp_dir() / "cadence";
    fs::create_directories(dir);
    const fs::path cfgp = dir / "c.cfg";
    {
        SimConfig cfg;
        cfg.eta = 0.02;
        cfg.dt = 2e-3;
        cfg.horizon = 0.012;
        cfg.particles = 2;
        cfg.k_field = 4;
        cfg.k_noise = 1;
        std::ofstream(cfgp) << format_config(cfg);
    }
    std::string out;
    const int rc = run_cli("run --config " + cfgp.string() + " --snapshot-every 2 --out-dir " +
                               dir.string(),
                           &out);
    CHECK(rc == 0);
    // 6 steps, cadence 2: interior snapshots at steps 2 and 4, then the final.
    int found = 0;
    for (int i = 0; i < 3; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "mean_%06d.mfns", i);
        const fs::path p = dir / name;
        if (fs::exists(p)) {
            ++found;
            CHECK(read_snapshot(p.string()).field.truncation() == 4);
        }
    }
    CHECK(found == 3);
}
