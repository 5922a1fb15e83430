// qed_core.hpp: domain types and scalar cavity-QED parameter conversions
//
// Unit convention: every rate and frequency in the public data model is an
// ordinary frequency (the "/2π" value) in GHz. Lifetimes are in ns, so a total
// decay rate R in GHz corresponds to a lifetime 1/(2π R) in ns. Angular
// frequencies appear only inside the master-equation oracle.
//
// Decay into phonon sidebands is not modified by the cavity in this model; only
// the zero-phonon line couples to the mode.

#pragma once

#include <cstddef>
#include <numbers>
#include <vector>

namespace cqed {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Speed of light expressed so that c / λ[nm] gives GHz.
inline constexpr double speed_of_light_nm_ghz = 299792458.0;

struct CavityParams {
    double omega_c{0.0};     // resonance, GHz
    double kappa{45.0};      // total energy decay rate, GHz
    double kappa_left{22.5}; // input mirror coupling, GHz
    double kappa_right{22.5};// output mirror coupling, GHz

    // Symmetric, lossless mirrors: κ_ℓ = κ_r = κ/2.
    static CavityParams symmetric(double omega_c, double kappa) {
        return {omega_c, kappa, 0.5 * kappa, 0.5 * kappa};
    }

    void validate() const;
};

struct Emitter {
    double omega_0{0.0};        // zero-phonon line, GHz
    double g{0.0};              // vacuum Rabi coupling, GHz
    double gamma_prime{0.040};  // total free-space decay Γ′, GHz
    double branching_zpl{0.33}; // Γ′_zpl / Γ′
    double gamma_star{0.0};     // pure dephasing γ*, GHz

    // Coherence decay γ = Γ′ + 2γ*.
    double gamma() const noexcept { return gamma_prime + 2.0 * gamma_star; }
    double gamma_zpl() const noexcept { return gamma_prime * branching_zpl; }
    double gamma_red() const noexcept { return gamma_prime * (1.0 - branching_zpl); }

    void validate() const;
};

struct SystemModel {
    CavityParams cavity;
    std::vector<Emitter> emitters;

    void validate() const;
};

// Probe detunings for one laser frequency. Sign convention:
//   delta_c     = ω_L − ω_c
//   delta_i[k]  = ω_L − ω_k
//   delta_mc[k] = ω_k − ω_c = delta_c − delta_i[k]
struct Detunings {
    double delta_c{0.0};
    std::vector<double> delta_i;
    std::vector<double> delta_mc;
};

Detunings detunings(const SystemModel& model, double omega_L);

// Γ_1D = g²κ / ((κ/2)² + Δ_mc²)
double gamma_1d(double g, double kappa, double delta_mc);

// C = 4g² / (κγ)
double cooperativity(double g, double kappa, double gamma);

// F_P = Γ_1D / Γ′_zpl
double purcell_factor(double gamma_1d, double gamma_zpl);

// β = Γ_1D / (Γ_1D + Γ′)
double beta_factor(double gamma_1d, double gamma_prime);

// τ = 1 / (2π (Γ′ + Γ_1D)), ns
double excited_lifetime(double gamma_prime, double gamma_1d);

// Inverse of excited_lifetime: total decay rate in GHz for a lifetime in ns.
double total_rate_from_lifetime(double tau_ns);

// Q = ω_c / κ with ω_c in THz and κ in GHz.
double quality_factor(double omega_c_thz, double kappa_ghz);
double kappa_from_q(double omega_c_thz, double q);

// Vacuum frequency in GHz of a wavelength in nm.
double frequency_from_wavelength(double wavelength_nm);

} // namespace cqed
