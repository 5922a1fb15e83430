#include "cqed/app.hpp"

#include "cqed/collective.hpp"
#include "cqed/ensemble.hpp"
#include "cqed/fitkit.hpp"
#include "cqed/io.hpp"
#include "cqed/oracle.hpp"
#include "cqed/qed_core.hpp"
#include "cqed/spectrum.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

namespace cqed::cli {

namespace {
namespace fs = std::filesystem;
using io::json;

constexpr const char* kModule = "cli";

struct Context {
    const RunConfig& config;
    const RunOptions& options;
    fs::path out_dir;
    std::vector<fs::path> written;

    void log(const std::string& msg) const {
        if (options.log) *options.log << "[cqed] " << msg << '\n';
    }

    fs::path input(const std::string& name) const {
        const fs::path p(config.inputs.at(name));
        return p.is_absolute() ? p : options.input_base / p;
    }

    bool declared(const std::string& name) const { return config.outputs.count(name) > 0; }

    void write(const std::string& name, const std::string& content) {
        const fs::path path = out_dir / config.outputs.at(name);
        io::write_text_atomic(path, content);
        written.push_back(path);
        log("wrote " + path.lexically_normal().string());
    }

    void write_json(const std::string& name, json j) {
        if (config.timestamp) {
            const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
            char buf[32];
            std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
            j["generated_at"] = buf;
        }
        write(name, j.dump(2) + "\n");
    }
};

std::string csv_row(std::initializer_list<double> cells) {
    std::string row;
    for (double c : cells) {
        if (!row.empty()) row += ',';
        row += io::format_double(c);
    }
    return row + '\n';
}

// Moves a detuning-frame spectrum onto absolute frequencies.
Spectrum to_absolute(Spectrum s, double omega_c) {
    if (s.frame == Frame::detuning) {
        for (auto& f : s.frequencies) f += omega_c;
        s.frame = Frame::absolute;
    }
    return s;
}

void run_simulate(Context& ctx) {
    const auto& cfg = ctx.config;
    const double omega_c = cfg.model.cavity.omega_c;
    std::vector<double> grid = make_grid(cfg);
    if (cfg.frame == Frame::detuning) {
        for (auto& f : grid) f += omega_c;
    }
    std::optional<double> noise;
    if (cfg.noise_sigma > 0.0) noise = cfg.noise_sigma;
    Spectrum s = sample_spectrum(cfg.model, grid, noise, cfg.seed);
    if (cfg.frame == Frame::detuning) {
        for (std::size_t i = 0; i < s.size(); ++i) s.frequencies[i] -= omega_c;
        s.frame = Frame::detuning;
        // Shifting back can merge neighbours on a large absolute offset.
        s.validate();
    }
    ctx.log("simulated " + std::to_string(s.size()) + " points");
    ctx.write("spectrum", io::format_spectrum_csv(s));
}

void run_fit(Context& ctx) {
    const auto& cfg = ctx.config;
    const auto& fit = cfg.fit;
    std::vector<std::string> warnings;
    json j;
    if (fit.kind == FitKind::decay) {
        const auto hist = io::read_histogram_csv(ctx.input("histogram"), &warnings);
        for (const auto& w : warnings) ctx.log(w);
        const auto result = fit_exponential_decay(hist);
        j = io::fit_result_json(result);
    } else {
        Spectrum s = io::read_spectrum_csv(ctx.input("spectrum"), &warnings);
        for (const auto& w : warnings) ctx.log(w);
        if (fit.kind == FitKind::lorentzian) {
            const auto result = fit_lorentzian(s, fit.lorentzian);
            j = io::fit_result_json(result);
            const double omega_c = result.param("omega_c");
            if (s.frame == Frame::absolute && omega_c > 0.0) {
                j["quality_factor"] = quality_factor(omega_c / 1000.0, result.param("kappa"));
            }
        } else {
            const double omega_c = cfg.model.cavity.omega_c;
            FrequencyWindow window = *fit.window;
            if (s.frame == Frame::detuning) {
                window.lo += omega_c;
                window.hi += omega_c;
            }
            s = to_absolute(std::move(s), omega_c);
            const auto result = fit_antiresonance(s, cfg.model.cavity, window, fit.antiresonance);
            j = io::fit_result_json(result);
        }
    }
    ctx.log(std::string("fit converged: ") + (j["converged"].get<bool>() ? "yes" : "no"));
    ctx.write_json("result", j);
}

void run_collective(Context& ctx) {
    const auto& cfg = ctx.config;
    const auto& model = cfg.model;
    CollectiveRates rates;
    if (cfg.collective.delta_mc) {
        std::vector<double> g;
        for (const auto& e : model.emitters) g.push_back(e.g);
        rates = collective_rates(g, model.cavity.kappa, *cfg.collective.delta_mc);
    } else {
        rates = collective_rates(model, cfg.collective.convention);
    }
    const auto modes = dressed_modes(model.emitters, rates);
    json j = io::collective_json(rates, &modes);
    j["convention"] = cfg.collective.delta_mc ? "fixed_delta_mc"
                      : cfg.collective.convention == DetuningConvention::common_mean
                          ? "common_mean"
                          : "per_pair_geometric";
    ctx.write_json("result", j);
}

void run_oracle_check(Context& ctx) {
    const auto& cfg = ctx.config;
    const auto& model = cfg.model;
    const auto& grid_spec = cfg.grid;
    std::vector<double> grid;
    if (grid_spec.start || grid_spec.center || grid_spec.half_span) {
        grid = make_grid(cfg);
        if (cfg.frame == Frame::detuning) {
            for (auto& f : grid) f += model.cavity.omega_c;
        }
    } else {
        grid = cavity_grid(model.cavity, grid_spec.points.value_or(201));
    }
    const HilbertLayout layout{model.emitters.size(), cfg.oracle.n_max};

    std::string report = "omega_L_ghz,T_oracle,T_analytic,max_excitation\n";
    double max_dev = 0.0;
    double max_exc = 0.0;
    double worst_omega = grid.front();
    for (double w : grid) {
        const auto r = transmission_oracle(model, layout, w, cfg.oracle.alpha_in);
        const double t = transmission_multi(model, w);
        const double dev = std::abs(r.transmission - t) / t;
        if (dev > max_dev) {
            max_dev = dev;
            worst_omega = w;
        }
        max_exc = std::max(max_exc, r.max_excitation);
        report += csv_row({w, r.transmission, t, r.max_excitation});
    }
    const bool passed = max_dev < cfg.oracle.rel_tol;
    ctx.log("max relative deviation " + io::format_double(max_dev));
    ctx.write("report", report);

    if (ctx.declared("summary")) {
        json j;
        j["points"] = grid.size();
        j["n_max"] = cfg.oracle.n_max;
        j["alpha_in"] = cfg.oracle.alpha_in;
        j["max_rel_deviation"] = max_dev;
        j["worst_omega_L"] = worst_omega;
        j["max_excitation"] = max_exc;
        j["rel_tol"] = cfg.oracle.rel_tol;
        j["passed"] = passed;
        if (!cfg.oracle.n_max_list.empty()) {
            const auto table =
                convergence_check(model, worst_omega, cfg.oracle.alpha_in, cfg.oracle.n_max_list);
            json rows = json::array();
            for (const auto& row : table.rows) {
                rows.push_back({{"n_max", row.n_max},
                                {"transmission", row.transmission},
                                {"max_excitation", row.max_excitation}});
            }
            j["convergence"] = {{"omega_L", worst_omega}, {"rows", rows}};
            if (table.converged_at) j["convergence"]["converged_at"] = *table.converged_at;
            else j["convergence"]["converged_at"] = nullptr;
        }
        ctx.write_json("summary", j);
    }
}

void run_ensemble(Context& ctx) {
    const auto& cfg = ctx.config;
    const auto emitters = sample_ensemble(cfg.ensemble, cfg.model.cavity);
    std::string csv = "index,omega_0_ghz,g_ghz,gamma_prime_ghz,gamma_star_ghz\n";
    double sum = 0.0;
    for (std::size_t i = 0; i < emitters.size(); ++i) {
        const auto& e = emitters[i];
        sum += e.omega_0;
        csv += std::to_string(i) + "," + io::format_double(e.omega_0) + "," +
               io::format_double(e.g) + "," + io::format_double(e.gamma_prime) + "," +
               io::format_double(e.gamma_star) + "\n";
    }
    ctx.log("sampled " + std::to_string(emitters.size()) + " emitters");
    ctx.write("emitters", csv);

    if (ctx.declared("summary")) {
        const double band = cfg.band_halfwidth.value_or(0.5 * cfg.model.cavity.kappa);
        const double omega_c = cfg.model.cavity.omega_c;
        std::size_t in_band = 0;
        for (const auto& e : emitters) {
            if (std::abs(e.omega_0 - omega_c) <= band) ++in_band;
        }
        json j;
        j["seed"] = cfg.ensemble.seed;
        j["count"] = emitters.size();
        j["expected_count"] = mean_emitter_count(cfg.ensemble);
        j["effective_volume_um3"] = effective_volume(cfg.ensemble);
        j["mean_frequency"] = emitters.empty() ? 0.0 : sum / static_cast<double>(emitters.size());
        j["band_halfwidth"] = band;
        j["in_band"] = in_band;
        j["expected_in_band"] = expected_in_band(cfg.ensemble, cfg.model.cavity, band);
        ctx.write_json("summary", j);
    }
}

void run_tune(Context& ctx) {
    const auto& cfg = ctx.config;
    const auto& e = cfg.model.emitters;
    const auto result = tune_pair_to_resonance(e[0], e[1], cfg.tune.config, cfg.tune.tolerance,
                                               cfg.tune.max_steps);
    std::string csv = "step,omega_1_ghz,omega_2_ghz,separation_ghz\n";
    auto row = [&csv](std::size_t step, double a, double b) {
        csv += std::to_string(step) + "," + io::format_double(a) + "," + io::format_double(b) +
               "," + io::format_double(std::abs(a - b)) + "\n";
    };
    row(0, result.initial_first, result.initial_second);
    for (std::size_t k = 0; k < result.trajectory.size(); ++k) {
        row(k + 1, result.trajectory[k].first, result.trajectory[k].second);
    }
    ctx.log(std::string("tuning ") + (result.converged ? "converged" : "did not converge") + " after " +
            std::to_string(result.trajectory.size()) + " steps");
    ctx.write("trajectory", csv);

    if (ctx.declared("summary")) {
        const auto& last = result.trajectory.empty()
                               ? std::pair{result.initial_first, result.initial_second}
                               : result.trajectory.back();
        json j;
        j["seed"] = cfg.tune.config.seed;
        j["converged"] = result.converged;
        j["steps"] = result.trajectory.size();
        j["final_separation"] = std::abs(last.first - last.second);
        j["tolerance"] = cfg.tune.tolerance;
        ctx.write_json("summary", j);
    }
}

void run_characterize(Context& ctx) {
    const auto& c = ctx.config.characterize;
    const auto mol = characterize_molecule(c.tau1, c.delta1, c.tau2, c.delta2, c.kappa);
    json j;
    j["g"] = mol.g;
    j["gamma_prime"] = mol.gamma_prime;
    json per = json::array();
    for (const auto& [tau, delta] : {std::pair{c.tau1, c.delta1}, std::pair{c.tau2, c.delta2}}) {
        const double g1d = gamma_1d(mol.g, c.kappa, delta);
        json row;
        row["delta_mc"] = delta;
        row["tau_measured"] = tau;
        row["tau_model"] = excited_lifetime(mol.gamma_prime, g1d);
        row["gamma_1d"] = g1d;
        row["purcell_factor"] = purcell_factor(g1d, c.branching_zpl * mol.gamma_prime);
        row["beta"] = beta_factor(g1d, mol.gamma_prime);
        per.push_back(row);
    }
    j["detunings"] = per;
    ctx.write_json("result", j);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, kModule, "read_config", "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}
} // namespace

void apply_overrides(RunConfig& config, const RunOptions& options) {
    if (options.seed) {
        config.seed = *options.seed;
        config.ensemble.seed = *options.seed;
        config.tune.config.seed = *options.seed;
        return;
    }
    if (!config.ensemble_seed_set) config.ensemble.seed = config.seed;
    if (!config.tuning_seed_set) config.tune.config.seed = config.seed;
}

std::vector<fs::path> dispatch(const RunConfig& config, const RunOptions& options) {
    Context ctx{config, options, options.out_dir.value_or(fs::path(config.output_dir)), {}};
    ctx.log("running " + std::string(to_string(config.command)));
    switch (config.command) {
    case Command::simulate: run_simulate(ctx); break;
    case Command::fit: run_fit(ctx); break;
    case Command::collective: run_collective(ctx); break;
    case Command::oracle_check: run_oracle_check(ctx); break;
    case Command::ensemble: run_ensemble(ctx); break;
    case Command::tune: run_tune(ctx); break;
    case Command::characterize: run_characterize(ctx); break;
    }
    return ctx.written;
}

int exit_code(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::config: return 2;
    case ErrorKind::input: return 3;
    case ErrorKind::io: return 4;
    case ErrorKind::invalid_parameter: return 5;
    case ErrorKind::contract: return 6;
    case ErrorKind::numeric:
    case ErrorKind::degenerate_kernel: return 7;
    case ErrorKind::no_feature:
    case ErrorKind::no_dip:
    case ErrorKind::ambiguous_window:
    case ErrorKind::no_decay: return 8;
    case ErrorKind::singular_system:
    case ErrorKind::inconsistent_data: return 9;
    }
    return 1;
}

std::string error_json(const Error& error) {
    json j;
    j["error"] = {{"module", error.module()},
                  {"operation", error.operation()},
                  {"kind", std::string(to_string(error.kind()))},
                  {"message", error.what()}};
    return j.dump();
}

int run_main(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Cavity QED simulation, fitting and characterization"};
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    bool quiet = false;
    app.add_option("--config", config_path, "Run configuration (JSON)")->required();
    app.add_option("--seed", seed, "Override every seed in the config");
    app.add_option("--out", out_dir, "Output directory (overrides CQED_OUTPUT_DIR and output_dir)");
    app.add_flag("--quiet", quiet, "Suppress progress messages");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << error_json(Error(ErrorKind::config, kModule, "parse_arguments", e.what())) << '\n';
        return exit_code(ErrorKind::config);
    }

    try {
        const fs::path path(config_path);
        RunConfig config = parse_config(read_file(path));
        RunOptions options;
        options.seed = seed;
        options.input_base = path.has_parent_path() ? path.parent_path() : fs::path(".");
        if (!out_dir.empty()) {
            options.out_dir = out_dir;
        } else if (const char* env = std::getenv("CQED_OUTPUT_DIR"); env && *env) {
            options.out_dir = env;
        } else if (fs::path(config.output_dir).is_relative()) {
            options.out_dir = options.input_base / config.output_dir;
        }
        options.log = quiet ? nullptr : &err;
        apply_overrides(config, options);
        dispatch(config, options);
        return 0;
    } catch (const Error& e) {
        err << error_json(e) << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        err << error_json(Error(ErrorKind::io, kModule, "dispatch", e.what())) << '\n';
        return 1;
    }
}

} // namespace cqed::cli
