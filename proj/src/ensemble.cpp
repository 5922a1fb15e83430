#include "cqed/ensemble.hpp"

#include "cqed/errors.hpp"

#include <algorithm>
#include <cmath>

namespace cqed {

namespace {
constexpr const char* kModule = "ensemble";

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
} // namespace

void EnsembleConfig::validate() const {
    const char* op = "EnsembleConfig";
    require(density >= 0.0, kModule, op, "density must be >= 0");
    require(sigma_inhom >= 0.0, kModule, op, "sigma_inhom must be >= 0");
    require(center_wavelength > 0.0, kModule, op, "center_wavelength must be > 0");
    require(mode_volume > 0.0, kModule, op, "mode_volume must be > 0");
    require(refractive_index > 0.0, kModule, op, "refractive_index must be > 0");
    require(slab_thickness > 0.0, kModule, op, "slab_thickness must be > 0");
    require(aspect_ratio > 0.0, kModule, op, "aspect_ratio must be > 0");
    require(g_max >= 0.0, kModule, op, "g_max must be >= 0");
    require(gamma_prime > 0.0, kModule, op, "gamma_prime must be > 0");
    require(gamma_star >= 0.0, kModule, op, "gamma_star must be >= 0");
    require(branching_zpl >= 0.0 && branching_zpl <= 1.0, kModule, op,
            "branching_zpl must lie in [0, 1]");
}

double effective_volume(const EnsembleConfig& config) {
    const double lambda_over_n_um = config.center_wavelength * 1e-3 / config.refractive_index;
    return config.mode_volume * lambda_over_n_um * lambda_over_n_um * lambda_over_n_um;
}

double mean_emitter_count(const EnsembleConfig& config) {
    return config.density * effective_volume(config);
}

double ensemble_center_frequency(const EnsembleConfig& config) {
    return frequency_from_wavelength(config.center_wavelength);
}

std::vector<Emitter> sample_ensemble(const EnsembleConfig& config, const CavityParams& cavity) {
    config.validate();
    cavity.validate();
    std::vector<Emitter> out;
    const double mean = mean_emitter_count(config);
    if (mean <= 0.0) return out;

    Rng rng(config.seed);
    std::poisson_distribution<long> count_dist(mean);
    const long count = count_dist(rng);

    const double volume = effective_volume(config);
    const double lz = config.slab_thickness;
    const double ly = std::sqrt(volume / (lz * config.aspect_ratio));
    const double lx = config.aspect_ratio * ly;
    const double root_two_pi = std::sqrt(two_pi);
    const double sx = lx / root_two_pi;
    const double sy = ly / root_two_pi;
    const double sz = lz / root_two_pi;

    std::uniform_real_distribution<double> unit(-0.5, 0.5);
    std::normal_distribution<double> freq(ensemble_center_frequency(config), config.sigma_inhom);
    out.reserve(static_cast<std::size_t>(count));
    for (long k = 0; k < count; ++k) {
        const double x = lx * unit(rng);
        const double y = ly * unit(rng);
        const double z = lz * unit(rng);
        const double arg = x * x / (4 * sx * sx) + y * y / (4 * sy * sy) + z * z / (4 * sz * sz);
        Emitter e;
        e.omega_0 = config.sigma_inhom > 0.0 ? freq(rng) : ensemble_center_frequency(config);
        e.g = config.g_max * std::exp(-arg);
        e.gamma_prime = config.gamma_prime;
        e.gamma_star = config.gamma_star;
        e.branching_zpl = config.branching_zpl;
        out.push_back(e);
    }
    return out;
}

double expected_in_band(const EnsembleConfig& config, const CavityParams& cavity,
                        double band_halfwidth) {
    config.validate();
    require(band_halfwidth >= 0.0, kModule, "expected_in_band", "band_halfwidth must be >= 0");
    const double mean = mean_emitter_count(config);
    const double mu = ensemble_center_frequency(config);
    const double lo = cavity.omega_c - band_halfwidth;
    const double hi = cavity.omega_c + band_halfwidth;
    if (config.sigma_inhom == 0.0) return (mu >= lo && mu <= hi && band_halfwidth > 0.0) ? mean : 0.0;
    if (std::isinf(band_halfwidth)) return mean;
    const double s = config.sigma_inhom;
    return mean * (normal_cdf((hi - mu) / s) - normal_cdf((lo - mu) / s));
}

void TuningConfig::validate() const {
    const char* op = "TuningConfig";
    require(shift_cap >= 0.0, kModule, op, "shift_cap must be >= 0");
    require(rate_scale >= 0.0, kModule, op, "rate_scale must be >= 0");
    require(jitter_sigma >= 0.0, kModule, op, "jitter_sigma must be >= 0");
    require(direction_bias >= -1.0 && direction_bias <= 1.0, kModule, op,
            "direction_bias must lie in [-1, 1]");
    require(max_dose_per_step > 0.0, kModule, op, "max_dose_per_step must be > 0");
}

TunableEmitter make_tunable(const Emitter& emitter, Rng& rng) {
    std::uniform_real_distribution<double> decade(-1.0, 0.0);
    return {emitter, emitter.omega_0, std::pow(10.0, decade(rng))};
}

TunableEmitter stark_tune_step(const TunableEmitter& emitter, double dose,
                               const TuningConfig& config, Rng& rng) {
    config.validate();
    require(dose >= 0.0, kModule, "stark_tune_step", "dose must be >= 0");
    TunableEmitter out = emitter;
    if (dose == 0.0) return out;
    double shift = config.direction_bias * config.rate_scale * emitter.rate_multiplier * dose;
    if (config.jitter_sigma > 0.0) {
        std::normal_distribution<double> jitter(0.0, config.jitter_sigma);
        shift += jitter(rng);
    }
    const double cumulative =
        std::clamp(emitter.cumulative_shift() + shift, -config.shift_cap, config.shift_cap);
    out.emitter.omega_0 = emitter.origin + cumulative;
    return out;
}

TuningResult tune_pair_to_resonance(TunableEmitter first, TunableEmitter second,
                                    const TuningConfig& config, double tolerance,
                                    std::size_t max_steps, Rng& rng) {
    config.validate();
    require(tolerance > 0.0, kModule, "tune_pair_to_resonance", "tolerance must be > 0");
    TuningResult result;
    result.initial_first = first.emitter.omega_0;
    result.initial_second = second.emitter.omega_0;

    auto separation = [&] { return second.emitter.omega_0 - first.emitter.omega_0; };
    const double bias = std::abs(config.direction_bias);
    for (std::size_t step = 0; step < max_steps; ++step) {
        const double sep = separation();
        if (std::abs(sep) <= tolerance) break;

        const bool move_first = first.rate_multiplier >= second.rate_multiplier;
        TunableEmitter& mover = move_first ? first : second;
        // Direction that closes the gap for the chosen molecule.
        const double direction = (move_first ? sep : -sep) > 0.0 ? 1.0 : -1.0;
        const double rate = config.rate_scale * mover.rate_multiplier * bias;
        const double dose =
            rate > 0.0 ? std::min(config.max_dose_per_step, std::abs(sep) / rate) : 0.0;

        TuningConfig step_config = config;
        step_config.direction_bias = direction * bias;
        mover = stark_tune_step(mover, dose, step_config, rng);
        result.trajectory.emplace_back(first.emitter.omega_0, second.emitter.omega_0);
    }
    result.converged = std::abs(separation()) <= tolerance;
    return result;
}

TuningResult tune_pair_to_resonance(const Emitter& first, const Emitter& second,
                                    const TuningConfig& config, double tolerance,
                                    std::size_t max_steps) {
    Rng rng(config.seed);
    TunableEmitter a = make_tunable(first, rng);
    TunableEmitter b = make_tunable(second, rng);
    return tune_pair_to_resonance(a, b, config, tolerance, max_steps, rng);
}

std::vector<Spectrum> crossing_spectra(const Emitter& first, const Emitter& second,
                                       const CavityParams& cavity, std::size_t n_frames,
                                       std::size_t points) {
    require(n_frames >= 2, kModule, "crossing_spectra", "n_frames must be >= 2");
    cavity.validate();
    const double w1 = first.omega_0;
    const double w2 = second.omega_0;
    double width = 0.0;
    for (const auto* e : {&first, &second}) {
        width = std::max(width, e->gamma() + gamma_1d(e->g, cavity.kappa, e->omega_0 - cavity.omega_c));
    }
    const double half_span = 0.5 * std::abs(w2 - w1) + 20.0 * width;
    const auto grid = uniform_grid(0.5 * (w1 + w2), half_span, points);

    std::vector<Spectrum> frames;
    frames.reserve(n_frames);
    for (std::size_t k = 0; k < n_frames; ++k) {
        const double frac = static_cast<double>(k) / static_cast<double>(n_frames - 1);
        Emitter moving = second;
        moving.omega_0 = (k + 1 == n_frames) ? w1 : w2 + (w1 - w2) * frac;
        SystemModel model{cavity, {first, moving}};
        frames.push_back(sample_spectrum(model, grid));
    }
    return frames;
}

} // namespace cqed
