#include "cqed/app.hpp"
#include "cqed/config.hpp"
#include "cqed/errors.hpp"
#include "cqed/io.hpp"

#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace cqed;
using namespace cqed::cli;
namespace fs = std::filesystem;
using json = io::json;

namespace {
ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected cqed::Error");
    return ErrorKind::io;
}

std::string message_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

// Fresh scratch directory per test case.
struct Scratch {
    fs::path dir;
    explicit Scratch(const std::string& name) {
        dir = fs::temp_directory_path() / ("cqed_cli_" + std::to_string(::getpid()) + "_" + name);
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
    fs::path operator/(const std::string& s) const { return dir / s; }
};

struct Run {
    int code{0};
    std::string err;
};

Run run_cli(const fs::path& config, const std::string& extra = "") {
    const fs::path err_file = config.parent_path() / "stderr.txt";
    const std::string cmd = std::string("\"") + CQED_CLI_PATH + "\" --config \"" + config.string() +
                            "\" " + extra + " 2> \"" + err_file.string() + "\" > /dev/null";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = slurp(err_file);
    fs::remove(err_file);
    return r;
}

std::set<std::string> listing(const fs::path& dir) {
    std::set<std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) out.insert(fs::relative(e.path(), dir).string());
    }
    return out;
}

const char* kMolecule = R"({
    "cavity": {"omega_c": -5.6, "kappa": 45.0},
    "emitters": [{"omega_0": 0.0, "g": 0.6, "gamma_prime": 0.040, "branching_zpl": 0.33, "gamma_star": 0.010}]
})";
} // namespace

TEST_CASE("parse_config: minimal simulate config") {
    const auto cfg = parse_config(std::string(R"({"command": "simulate", "model": )") + kMolecule +
                                  R"(, "outputs": {"spectrum": "s.csv"}})");
    CHECK(cfg.command == Command::simulate);
    CHECK(cfg.has_model);
    CHECK(cfg.model.cavity.kappa == 45.0);
    CHECK(cfg.model.cavity.kappa_left == 22.5);
    CHECK(cfg.model.cavity.kappa_right == 22.5);
    REQUIRE(cfg.model.emitters.size() == 1);
    CHECK(cfg.model.emitters[0].gamma_star == 0.010);
    CHECK(cfg.seed == default_seed);
    CHECK_FALSE(cfg.timestamp);
    const auto grid = make_grid(cfg);
    CHECK(grid.size() == 601);
    CHECK(grid.front() == doctest::Approx(-5.6 - 135.0));
    CHECK(grid.back() == doctest::Approx(-5.6 + 135.0));
}

TEST_CASE("parse_config: diagnostics name the key path") {
    const std::string typo = R"({"command": "simulate", "outputs": {"spectrum": "s.csv"},
        "model": {"cavity": {"kapa": 45.0}, "emitters": []}})";
    CHECK(kind_of([&] { parse_config(typo); }) == ErrorKind::config);
    CHECK(message_of([&] { parse_config(typo); }).find("model.cavity.kapa") != std::string::npos);

    const std::string negative = R"({"command": "simulate", "outputs": {"spectrum": "s.csv"},
        "model": {"cavity": {"kappa": -1.0}, "emitters": []}})";
    const auto msg = message_of([&] { parse_config(negative); });
    CHECK(msg.find("model.cavity.kappa") != std::string::npos);
    CHECK(msg.find("out of range") != std::string::npos);

    CHECK(kind_of([] { parse_config("{not json"); }) == ErrorKind::config);
    CHECK(kind_of([] { parse_config(R"({"command": "launch"})"); }) == ErrorKind::config);
    CHECK(message_of([] { parse_config(R"({"command": "simulate", "outputs": {}})"); }).find("model") !=
          std::string::npos);
    CHECK(kind_of([] {
              parse_config(R"({"command": "fit", "fit": {"kind": "antiresonance"},
                  "inputs": {"spectrum": "a.csv"}, "outputs": {"result": "r.json"}})");
          }) == ErrorKind::config);
    CHECK(kind_of([] { parse_config(R"({"command": "simulate", "seed": -3})"); }) == ErrorKind::config);
}

TEST_CASE("parse_config: seeds and overrides") {
    auto cfg = parse_config(std::string(R"({"command": "ensemble", "seed": 11, "model": )") + kMolecule +
                            R"(, "ensemble": {"seed": 5}, "outputs": {"emitters": "e.csv"}})");
    apply_overrides(cfg, {});
    CHECK(cfg.seed == 11);
    CHECK(cfg.ensemble.seed == 5);
    RunOptions opt;
    opt.seed = 99;
    apply_overrides(cfg, opt);
    CHECK(cfg.seed == 99);
    CHECK(cfg.ensemble.seed == 99);
    CHECK(cfg.tune.config.seed == 99);
}

TEST_CASE("spectrum CSV round trip and diagnostics") {
    Spectrum s;
    s.frequencies = {-1.0, -1.0 / 3.0, 0.1, 2.0 / 7.0};
    s.values = {0.9, 0.123456789012345678, 1e-9, 1.0 / 3.0};
    s.frame = Frame::detuning;
    s.seed = 42;
    std::istringstream in(io::format_spectrum_csv(s));
    const auto back = io::parse_spectrum_csv(in);
    CHECK(back.frequencies == s.frequencies);
    CHECK(back.values == s.values);
    CHECK(back.frame == Frame::detuning);
    REQUIRE(back.seed.has_value());
    CHECK(*back.seed == 42);

    std::istringstream shuffled("frequency_ghz,transmission\n0.0,0.5\n2.0,0.5\n1.0,0.5\n");
    const auto msg = message_of([&] { io::parse_spectrum_csv(shuffled); });
    CHECK(msg.find("line 4") != std::string::npos);
    std::istringstream again("frequency_ghz,transmission\n0.0,0.5\n2.0,0.5\n1.0,0.5\n");
    CHECK(kind_of([&] { io::parse_spectrum_csv(again); }) == ErrorKind::input);

    std::istringstream extra("frequency_ghz,transmission,note\n0.0,0.5,a\n1.0,0.6,b\n");
    std::vector<std::string> warnings;
    const auto e = io::parse_spectrum_csv(extra, &warnings);
    CHECK(e.size() == 2);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("note") != std::string::npos);

    std::istringstream bad("frequency_ghz,transmission\n0.0,abc\n");
    CHECK(message_of([&] { io::parse_spectrum_csv(bad); }).find("line 2") != std::string::npos);
}

TEST_CASE("histogram CSV round trip") {
    const auto h = make_decay_histogram(3.13, 1e4, 10.0, 50, 0.1);
    std::istringstream in(io::format_histogram_csv(h));
    const auto back = io::parse_histogram_csv(in);
    CHECK(back.bin_times == h.bin_times);
    CHECK(back.counts == h.counts);
    CHECK(back.bin_width == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("exit codes and error JSON") {
    CHECK(exit_code(ErrorKind::config) == 2);
    CHECK(exit_code(ErrorKind::input) == 3);
    CHECK(exit_code(ErrorKind::io) == 4);
    CHECK(exit_code(ErrorKind::invalid_parameter) == 5);
    CHECK(exit_code(ErrorKind::no_dip) == exit_code(ErrorKind::no_feature));
    const auto j = json::parse(error_json(Error(ErrorKind::no_dip, "fitkit", "locate_dip", "nothing")));
    CHECK(j["error"]["module"] == "fitkit");
    CHECK(j["error"]["operation"] == "locate_dip");
    CHECK(j["error"]["kind"] == "no_dip");
    CHECK(j["error"]["message"] == "nothing");
}

TEST_CASE("cli: simulate places the dip at the analytic value") {
    Scratch tmp("simulate");
    spit(tmp / "sim.json", std::string(R"({"command": "simulate", "model": )") + kMolecule +
                               R"(, "grid": {"center": -0.0265, "half_span": 1.0, "points": 2001},
                                  "outputs": {"spectrum": "spectrum.csv"}})");
    const auto r = run_cli(tmp / "sim.json", "--quiet --out \"" + tmp.dir.string() + "/out\"");
    REQUIRE(r.code == 0);
    CHECK(r.err.empty());
    CHECK(listing(tmp.dir / "out") == std::set<std::string>{"spectrum.csv"});

    const auto s = io::read_spectrum_csv(tmp / "out/spectrum.csv");
    REQUIRE(s.size() == 2001);
    const SystemModel m{CavityParams::symmetric(-5.6, 45.0), {Emitter{0.0, 0.6, 0.040, 0.33, 0.010}}};
    for (std::size_t i = 0; i < s.size(); i += 100) {
        CHECK(std::abs(s.values[i] - transmission_multi(m, s.frequencies[i])) < 1e-9);
    }
    const auto it = std::min_element(s.values.begin(), s.values.end());
    const double dip = s.frequencies[static_cast<std::size_t>(it - s.values.begin())];
    CHECK(std::abs(dip + lamb_shift_1d(0.6, 45.0, 5.6)) < 0.01);

    // Same config, same bytes.
    const auto again = run_cli(tmp / "sim.json", "--quiet --out \"" + tmp.dir.string() + "/again\"");
    REQUIRE(again.code == 0);
    CHECK(slurp(tmp / "out/spectrum.csv") == slurp(tmp / "again/spectrum.csv"));
}

TEST_CASE("cli: noisy simulate is seed-deterministic and fit recovers the model") {
    Scratch tmp("fit");
    spit(tmp / "sim.json", std::string(R"({"command": "simulate", "seed": 3, "noise_sigma": 0.0,
        "model": )") + kMolecule + R"(, "grid": {"center": -0.0265, "half_span": 1.5, "points": 601},
        "outputs": {"spectrum": "spectrum.csv"}})");
    REQUIRE(run_cli(tmp / "sim.json", "--quiet").code == 0);
    spit(tmp / "fit.json", std::string(R"({"command": "fit", "model": )") + kMolecule +
                               R"(, "fit": {"kind": "antiresonance", "window": [-1.0, 1.0]},
                                  "inputs": {"spectrum": "spectrum.csv"}, "outputs": {"result": "fit.json.out"}})");
    const auto r = run_cli(tmp / "fit.json", "--out \"" + tmp.dir.string() + "\"");
    REQUIRE(r.code == 0);
    CHECK(r.err.find("[cqed]") != std::string::npos);
    const auto j = json::parse(slurp(tmp / "fit.json.out"));
    CHECK(j["converged"] == true);
    CHECK(j["parameters"]["g"].get<double>() == doctest::Approx(0.6).epsilon(1e-4));
    CHECK(j["parameters"]["gamma_star"].get<double>() == doctest::Approx(0.010).epsilon(1e-4));
    CHECK(std::abs(j["parameters"]["omega_0"].get<double>()) < 1e-4);
    CHECK_FALSE(j.contains("generated_at"));

    spit(tmp / "noisy.json", std::string(R"({"command": "simulate", "seed": 3, "noise_sigma": 0.01,
        "model": )") + kMolecule + R"(, "outputs": {"spectrum": "noisy.csv"}})");
    REQUIRE(run_cli(tmp / "noisy.json", "--quiet").code == 0);
    const auto first = slurp(tmp / "noisy.csv");
    REQUIRE(run_cli(tmp / "noisy.json", "--quiet").code == 0);
    CHECK(slurp(tmp / "noisy.csv") == first);
    REQUIRE(run_cli(tmp / "noisy.json", "--quiet --seed 4").code == 0);
    CHECK(slurp(tmp / "noisy.csv") != first);
}

TEST_CASE("cli: oracle-check agrees with the analytic spectrum") {
    Scratch tmp("oracle");
    spit(tmp / "oracle.json", std::string(R"({"command": "oracle-check", "model": )") + kMolecule +
                                  R"(, "grid": {"points": 41},
                                     "outputs": {"report": "report.csv", "summary": "summary.json"}})");
    const auto r = run_cli(tmp / "oracle.json", "--quiet");
    REQUIRE(r.code == 0);
    CHECK(listing(tmp.dir) == std::set<std::string>{"oracle.json", "report.csv", "summary.json"});
    const auto j = json::parse(slurp(tmp / "summary.json"));
    CHECK(j["points"] == 41);
    CHECK(j["passed"] == true);
    CHECK(j["max_rel_deviation"].get<double>() < 0.01);
    std::istringstream report(slurp(tmp / "report.csv"));
    std::string header;
    std::getline(report, header);
    CHECK(header == "omega_L_ghz,T_oracle,T_analytic,max_excitation");
}

TEST_CASE("cli: collective, ensemble, tune and characterize run end to end") {
    Scratch tmp("misc");
    spit(tmp / "coll.json", R"({"command": "collective", "collective": {"delta_mc": 5.6},
        "model": {"cavity": {"omega_c": 0.0, "kappa": 45.0},
                  "emitters": [{"omega_0": 0.0, "g": 0.6}, {"omega_0": 0.0, "g": 0.5}]},
        "outputs": {"result": "coll.out"}})");
    REQUIRE(run_cli(tmp / "coll.json", "--quiet").code == 0);
    const auto c = json::parse(slurp(tmp / "coll.out"));
    CHECK(c["convention"] == "fixed_delta_mc");

    spit(tmp / "ens.json", R"({"command": "ensemble", "seed": 8,
        "model": {"cavity": {"omega_c": 384349.305, "kappa": 45.0}, "emitters": []},
        "ensemble": {"band_halfwidth": 22.5},
        "outputs": {"emitters": "em.csv", "summary": "ens.out"}})");
    REQUIRE(run_cli(tmp / "ens.json", "--quiet").code == 0);
    const auto e = json::parse(slurp(tmp / "ens.out"));
    CHECK(e["expected_count"].get<double>() == doctest::Approx(16.6).epsilon(1e-3));
    CHECK(e["expected_in_band"].get<double>() == doctest::Approx(3.28).epsilon(0.01));

    spit(tmp / "tune.json", R"({"command": "tune", "seed": 1,
        "model": {"cavity": {"omega_c": 0.0, "kappa": 45.0},
                  "emitters": [{"omega_0": 0.0, "g": 0.6}, {"omega_0": 3.0, "g": 0.6}]},
        "outputs": {"trajectory": "traj.csv", "summary": "tune.out"}})");
    REQUIRE(run_cli(tmp / "tune.json", "--quiet").code == 0);
    CHECK(json::parse(slurp(tmp / "tune.out"))["converged"] == true);
    std::istringstream traj(slurp(tmp / "traj.csv"));
    std::string line;
    std::getline(traj, line);
    CHECK(line == "step,omega_1_ghz,omega_2_ghz,separation_ghz");

    spit(tmp / "char.json", R"({"command": "characterize",
        "characterize": {"tau1": 3.13, "delta1": -31.0, "tau2": 2.2, "delta2": 5.6, "kappa": 45.0},
        "outputs": {"result": "char.out"}})");
    REQUIRE(run_cli(tmp / "char.json", "--quiet").code == 0);
    const auto m = json::parse(slurp(tmp / "char.out"));
    CHECK(m["g"].get<double>() == doctest::Approx(0.6).epsilon(0.1));
    CHECK(m["gamma_prime"].get<double>() == doctest::Approx(0.040).epsilon(0.1));
}

TEST_CASE("cli: failures print error JSON and map to exit codes") {
    Scratch tmp("errors");
    spit(tmp / "typo.json", R"({"command": "simulate", "outputs": {"spectrum": "s.csv"},
        "model": {"cavity": {"kapa": 45.0}, "emitters": []}})");
    auto r = run_cli(tmp / "typo.json");
    CHECK(r.code == 2);
    const auto j = json::parse(r.err);
    CHECK(j["error"]["kind"] == "config");
    CHECK(j["error"]["message"].get<std::string>().find("kapa") != std::string::npos);

    spit(tmp / "missing.json", R"({"command": "fit", "fit": {"kind": "decay"},
        "inputs": {"histogram": "nowhere.csv"}, "outputs": {"result": "r.json"}})");
    r = run_cli(tmp / "missing.json", "--quiet");
    CHECK(r.code == 4);
    CHECK(json::parse(r.err)["error"]["kind"] == "io");

    spit(tmp / "bad.csv", "frequency_ghz,transmission\n0.0,0.5\n2.0,0.5\n1.0,0.5\n");
    spit(tmp / "shuffled.json", R"({"command": "fit", "fit": {"kind": "lorentzian"},
        "inputs": {"spectrum": "bad.csv"}, "outputs": {"result": "r.json"}})");
    r = run_cli(tmp / "shuffled.json", "--quiet");
    CHECK(r.code == 3);
    CHECK(r.err.find("line 4") != std::string::npos);

    std::string flat = "time_ns,counts\n";
    for (int i = 0; i < 40; ++i) flat += std::to_string(0.1 * i) + ",20\n";
    spit(tmp / "flat.csv", flat);
    spit(tmp / "flat.json", R"({"command": "fit", "fit": {"kind": "decay"},
        "inputs": {"histogram": "flat.csv"}, "outputs": {"result": "r.json"}})");
    r = run_cli(tmp / "flat.json", "--quiet");
    CHECK(r.code == 8);
    CHECK(json::parse(r.err)["error"]["kind"] == "no_decay");
    CHECK_FALSE(fs::exists(tmp / "r.json"));

    spit(tmp / "sing.json", R"({"command": "characterize",
        "characterize": {"tau1": 3.0, "delta1": 5.0, "tau2": 2.5, "delta2": -5.0},
        "outputs": {"result": "c.json"}})");
    CHECK(run_cli(tmp / "sing.json", "--quiet").code == 9);

    CHECK(run_cli(tmp / "absent.json", "--quiet").code == 4);
    CHECK(run_cli(tmp / "sing.json", "--bogus").code == 2);
}
