// config.hpp: declarative run configuration for the cqed tool
//
// A run is one JSON document. Top-level keys:
//
//   command      simulate | fit | collective | oracle-check | ensemble | tune | characterize
//   seed         u64, default default_seed
//   output_dir   directory for declared outputs, default "."
//   timestamp    bool, add a generated_at field to JSON outputs (default false)
//   inputs       { spectrum | histogram : path }
//   outputs      { <name> : file name relative to output_dir }
//   model        { cavity: {omega_c, kappa, kappa_left, kappa_right},
//                  emitters: [{omega_0, g, gamma_prime, branching_zpl, gamma_star}] }
//   grid         { start, stop, points } or { center, half_span, points }
//   frame        absolute | detuning
//   noise_sigma  additive Gaussian noise on simulated spectra
//   oracle       { n_max, alpha_in, n_max_list, rel_tol }
//   collective   { convention: common_mean | per_pair_geometric, delta_mc }
//   ensemble     { density, sigma_inhom, center_wavelength, mode_volume, refractive_index,
//                  slab_thickness, aspect_ratio, g_max, gamma_prime, gamma_star,
//                  branching_zpl, seed, band_halfwidth }
//   tuning       { shift_cap, rate_scale, jitter_sigma, direction_bias, max_dose_per_step,
//                  seed, tolerance, max_steps }
//   fit          { kind: lorentzian | antiresonance | decay, window: [lo, hi],
//                  gamma_prime, branching_zpl, guess: {...} }
//   characterize { tau1, delta1, tau2, delta2, kappa, branching_zpl }
//
// Unknown keys are rejected with their full key path.

#pragma once

#include "cqed/ensemble.hpp"
#include "cqed/collective.hpp"
#include "cqed/fitkit.hpp"
#include "cqed/qed_core.hpp"
#include "cqed/spectrum.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cqed::cli {

enum class Command { simulate, fit, collective, oracle_check, ensemble, tune, characterize };

std::string_view to_string(Command c) noexcept;

struct GridSpec {
    std::optional<double> start;
    std::optional<double> stop;
    std::optional<double> center;
    std::optional<double> half_span;
    std::optional<std::size_t> points; // 601 for spectra, 201 for oracle-check
};

struct OracleSettings {
    std::size_t n_max{3};
    double alpha_in{0.003};
    std::vector<std::size_t> n_max_list;
    double rel_tol{0.01}; // pass threshold for max |T_oracle − T_analytic| / T_analytic
};

struct CollectiveSettings {
    DetuningConvention convention{DetuningConvention::common_mean};
    std::optional<double> delta_mc;
};

struct TuneSettings {
    TuningConfig config;
    double tolerance{0.040};
    std::size_t max_steps{10000};
};

enum class FitKind { lorentzian, antiresonance, decay };

struct FitSettings {
    FitKind kind{FitKind::lorentzian};
    std::optional<FrequencyWindow> window;
    AntiresonanceGuess antiresonance;
    std::optional<LorentzianGuess> lorentzian;
};

struct CharacterizeSettings {
    double tau1{0.0};
    double delta1{0.0};
    double tau2{0.0};
    double delta2{0.0};
    double kappa{45.0};
    double branching_zpl{0.33};
};

struct RunConfig {
    Command command{Command::simulate};
    std::uint64_t seed{default_seed};
    std::string output_dir{"."};
    bool timestamp{false};
    std::map<std::string, std::string> inputs;
    std::map<std::string, std::string> outputs;

    bool has_model{false};
    SystemModel model;
    GridSpec grid;
    Frame frame{Frame::absolute};
    double noise_sigma{0.0};

    OracleSettings oracle;
    CollectiveSettings collective;
    EnsembleConfig ensemble;
    std::optional<double> band_halfwidth;
    bool ensemble_seed_set{false};
    TuneSettings tune;
    bool tuning_seed_set{false};
    FitSettings fit;
    CharacterizeSettings characterize;
};

// Parses and validates a JSON document; throws Error{config} naming the key path.
RunConfig parse_config(const std::string& text);

// Grid implied by the grid settings, in the configured frame.
std::vector<double> make_grid(const RunConfig& config);

} // namespace cqed::cli
