// spectrum.hpp: analytic cavity transmission for zero, one, or N emitters
//
// All evaluations follow the low-saturation input–output result
//
//   t(ω_L) = −√(κ_ℓ κ_r) / ((iΔ_c − κ/2) + Σ_i g_i² / (iΔ_i − (Γ′_i/2 + γ*_i)))
//
// with the probe entering through the left mirror only. T = |t|². For
// κ_ℓ = κ_r = κ/2 the numerator is κ/2 and T ≤ 1 on every input.

#pragma once

#include "cqed/qed_core.hpp"

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace cqed {

enum class Frame { absolute, detuning };
enum class Provenance { simulated, measured };

inline constexpr std::uint64_t default_seed = 20250101;

struct Spectrum {
    std::vector<double> frequencies; // GHz, strictly increasing
    std::vector<double> values;      // intensity transmission
    Frame frame{Frame::absolute};
    Provenance provenance{Provenance::simulated};
    std::optional<std::uint64_t> seed;

    std::size_t size() const noexcept { return frequencies.size(); }

    // Throws input error on length mismatch, non-finite entries, or a
    // non-increasing frequency axis.
    void validate() const;
};

// Complex transmission amplitude t(ω_L) for any emitter count.
std::complex<double> transmission_amplitude(const SystemModel& model, double omega_L);

// Single-emitter form; throws contract error unless exactly one emitter.
double transmission_single(const SystemModel& model, double omega_L);

double transmission_multi(const SystemModel& model, double omega_L);

// Bare-cavity Lorentzian κ_ℓκ_r / (Δ_c² + (κ/2)²).
double transmission_bare(const CavityParams& cavity, double omega_L);

// Uniform grid of `points` samples over [center − half_span, center + half_span].
std::vector<double> uniform_grid(double center, double half_span, std::size_t points);

// Uniform grid spanning ±span_kappa·κ around ω_c.
std::vector<double> cavity_grid(const CavityParams& cavity, std::size_t points,
                                double span_kappa = 3.0);

// Evaluates transmission_multi on `grid`. With noise_sigma > 0, adds Gaussian
// noise drawn from a generator seeded with `seed` (or default_seed).
Spectrum sample_spectrum(const SystemModel& model, std::span<const double> grid,
                         std::optional<double> noise_sigma = std::nullopt,
                         std::optional<std::uint64_t> seed = std::nullopt);

// Amplitude ratio t/t₀ of the single-emitter antiresonance after eliminating
// the cavity:
//   (Δ_i + iγ/2) / (Δ_i + J_1D + i(γ + Γ_1D)/2),  γ = Γ′ + 2γ*
std::complex<double> antiresonance_ratio(const Emitter& emitter, double j1d, double gamma_1d,
                                         double delta_i);
double antiresonance_intensity_ratio(const Emitter& emitter, double j1d, double gamma_1d,
                                     double delta_i);

// Single-emitter cavity Lamb shift J_1D = −g²Δ_mc / (Δ_mc² + (κ/2)²).
double lamb_shift_1d(double g, double kappa, double delta_mc);

// T_bare(ω_0) − T(ω_0) for one emitter resonant with the cavity.
double dip_depth(const SystemModel& model);

// Indices of local minima whose topographic prominence is at least
// `min_prominence`. Flat-bottomed minima report their first sample.
std::vector<std::size_t> find_local_minima(std::span<const double> values,
                                           double min_prominence);

} // namespace cqed
