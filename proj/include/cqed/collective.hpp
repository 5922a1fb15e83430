// collective.hpp: cavity-mediated exchange and collective decay between emitters
//
// Eliminating a single lossy mode gives every emitter pair a complex coupling
//
//   J_ij + iΓ_ij/2 = i g_i g_j / (κ/2 − iΔ_mc)
//
// i.e. J_ij = −g_i g_j Δ_mc / (Δ_mc² + (κ/2)²), Γ_ij = g_i g_j κ / (Δ_mc² + (κ/2)²).
// The diagonal holds the single-emitter Lamb shift J_ii and Γ_ii = Γ_1D,i.

#pragma once

#include "cqed/qed_core.hpp"

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <vector>

namespace cqed {

enum class DetuningConvention {
    common_mean,       // one Δ_mc for all pairs: mean of the emitters' detunings
    per_pair_geometric // J_ij + iΓ_ij/2 = i g_i g_j √(χ_i χ_j), χ = 1/(κ/2 − iΔ_mc)
};

struct CollectiveRates {
    Eigen::MatrixXd j;     // GHz, symmetric
    Eigen::MatrixXd gamma; // GHz, symmetric
    double delta_mc{0.0};  // common detuning used (mean detuning for per-pair)

    std::size_t size() const noexcept { return static_cast<std::size_t>(j.rows()); }
};

struct DressedModes {
    std::vector<std::complex<double>> eigenvalues; // re: frequency, −2·im: linewidth
    std::vector<Eigen::VectorXcd> eigenvectors;    // unit norm

    double linewidth(std::size_t k) const { return -2.0 * eigenvalues.at(k).imag(); }
};

CollectiveRates collective_rates(std::span<const double> g, double kappa, double delta_mc);

CollectiveRates collective_rates(const SystemModel& model,
                                 DetuningConvention convention = DetuningConvention::common_mean);

// κ = Γ_12 |Δ_mc| / |J_12|, the linewidth implied by a measured pair.
double implied_kappa(double j12_abs, double gamma12, double delta_mc_abs);

// Non-Hermitian single-excitation Hamiltonian (GHz):
//   H_ij = (ω_i − J_ii) δ_ij − J_ij (1 − δ_ij) − (i/2) [(Γ′_i + 2γ*_i) δ_ij + Γ_ij]
// The −J sign places each eigenfrequency at the transmission dip.
Eigen::MatrixXcd effective_hamiltonian(std::span<const Emitter> emitters,
                                       const CollectiveRates& rates);

// Eigen-decomposition of effective_hamiltonian, sorted by real part.
DressedModes dressed_modes(std::span<const Emitter> emitters, const CollectiveRates& rates);

} // namespace cqed
