// ensemble.hpp: Monte-Carlo emitter ensembles and phenomenological Stark tuning
//
// Ensembles: the emitter count is Poisson with mean density × V, where
// V = mode_volume · (λ/n)³. Positions are uniform in a slab-shaped box of
// volume V (thickness = crystal thickness) centred on the field maximum, and
// the coupling follows a separable Gaussian field envelope whose intensity
// integrates to V:
//
//   g(x) = g_max · exp(−Σ_k x_k² / (4 s_k²)),  s_k = L_k / √(2π)
//
// Tuning: the dose response is linear with a hard cap on the cumulative shift
// plus Gaussian jitter. None of its defaults are measured values.

#pragma once

#include "cqed/qed_core.hpp"
#include "cqed/spectrum.hpp"

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace cqed {

using Rng = std::mt19937_64;

struct EnsembleConfig {
    double density{100.0};           // molecules / µm³
    double sigma_inhom{90.0};        // GHz
    double center_wavelength{780.0}; // nm
    double mode_volume{2.8};         // (λ/n)³
    double refractive_index{2.0};
    double slab_thickness{0.2};      // µm
    double aspect_ratio{3.0};        // box length / width in the slab plane
    double g_max{0.6};               // GHz
    double gamma_prime{0.040};       // GHz
    double gamma_star{0.010};        // GHz
    double branching_zpl{0.33};
    std::uint64_t seed{default_seed};

    void validate() const;
};

// Mode volume in µm³.
double effective_volume(const EnsembleConfig& config);
double mean_emitter_count(const EnsembleConfig& config);
double ensemble_center_frequency(const EnsembleConfig& config);

std::vector<Emitter> sample_ensemble(const EnsembleConfig& config, const CavityParams& cavity);

// Mean count × Gaussian mass of the inhomogeneous line within ±band_halfwidth of ω_c.
double expected_in_band(const EnsembleConfig& config, const CavityParams& cavity,
                        double band_halfwidth);

struct TuningConfig {
    double shift_cap{100.0};        // GHz, bound on |cumulative shift|
    double rate_scale{0.5};         // GHz per dose unit
    double jitter_sigma{0.005};     // GHz per dosed step
    double direction_bias{1.0};     // in [−1, 1]
    double max_dose_per_step{1.0};
    std::uint64_t seed{default_seed};

    void validate() const;
};

struct TunableEmitter {
    Emitter emitter;
    double origin{0.0};          // frequency before any tuning, GHz
    double rate_multiplier{1.0}; // molecule-specific factor on rate_scale

    double cumulative_shift() const noexcept { return emitter.omega_0 - origin; }
};

// Draws the per-molecule rate log-uniformly over [0.1, 1].
TunableEmitter make_tunable(const Emitter& emitter, Rng& rng);

// Shifts by direction_bias · rate_scale · rate_multiplier · dose, plus jitter
// when dose > 0, clamping the cumulative shift to ±shift_cap.
TunableEmitter stark_tune_step(const TunableEmitter& emitter, double dose,
                               const TuningConfig& config, Rng& rng);

struct TuningResult {
    std::vector<std::pair<double, double>> trajectory; // (ω₁, ω₂) after each step
    bool converged{false};
    double initial_first{0.0};
    double initial_second{0.0};
};

// Greedy controller: each step doses the faster molecule toward the other,
// with the dose sized to close the gap (up to max_dose_per_step).
TuningResult tune_pair_to_resonance(TunableEmitter first, TunableEmitter second,
                                    const TuningConfig& config, double tolerance,
                                    std::size_t max_steps, Rng& rng);

// Seeds from config.seed and samples both rate multipliers.
TuningResult tune_pair_to_resonance(const Emitter& first, const Emitter& second,
                                    const TuningConfig& config, double tolerance,
                                    std::size_t max_steps);

// Transmission frames with `second` swept linearly from its frequency onto `first`.
std::vector<Spectrum> crossing_spectra(const Emitter& first, const Emitter& second,
                                       const CavityParams& cavity, std::size_t n_frames,
                                       std::size_t points = 4001);

} // namespace cqed
