// oracle.hpp: brute-force steady state of the driven Tavis–Cummings master equation
//
// Basis: emitters are the leading tensor factors (emitter 0 slowest), the
// cavity Fock space is last. A basis state with emitter bits s_0..s_{N-1}
// (1 = excited) and photon number n has index
//
//   index = (Σ_k s_k · 2^{N−1−k}) · (n_max + 1) + n
//
// Superoperators act on column-stacked density matrices: vec(ρ)[r + c·dim] = ρ(r, c),
// so vec(AρB) = (Bᵀ ⊗ A) vec(ρ).
//
// In the frame rotating at the probe frequency (angular rates, ns⁻¹):
//
//   H = −Δ_c a†a − Σ Δ_i σ_i†σ_i + Σ g_i (σ_i a† + σ_i† a) + ε (a + a†),  ε = √κ_ℓ α_in
//   dρ/dt = −i[H, ρ] + κ D[a]ρ + Σ Γ′_i D[σ_i]ρ + Σ (γ*_i / 2) D[σᶻ_i]ρ
//   D[L]ρ = LρL† − ½{L†L, ρ}
//
// σᶻ is the Pauli operator, so the dephasing term damps coherences at γ* and
// the total coherence decay is Γ′/2 + γ* = γ/2.

#pragma once

#include "cqed/qed_core.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace cqed {

struct HilbertLayout {
    std::size_t n_emitters{0};
    std::size_t n_max{3};

    std::size_t fock_dim() const noexcept { return n_max + 1; }
    std::size_t dim() const noexcept { return (std::size_t{1} << n_emitters) * fock_dim(); }

    // `excited[k]` is the state of emitter k.
    std::size_t index(std::span<const bool> excited, std::size_t photons) const;
    bool is_excited(std::size_t index, std::size_t emitter) const;
    std::size_t photons(std::size_t index) const;
};

struct DriveParams {
    double alpha_in{0.003}; // √(photons/ns)
    double omega_L{0.0};    // GHz
};

struct Liouvillian {
    Eigen::MatrixXcd matrix; // dim² × dim², angular ns⁻¹
    HilbertLayout layout;
};

class DensityState {
public:
    DensityState(Eigen::MatrixXcd matrix, HilbertLayout layout);

    const Eigen::MatrixXcd& matrix() const noexcept { return matrix_; }
    const HilbertLayout& layout() const noexcept { return layout_; }

    std::complex<double> trace() const { return matrix_.trace(); }
    std::complex<double> expect(const Eigen::MatrixXcd& op) const { return (op * matrix_).trace(); }
    double min_eigenvalue() const;
    double hermiticity_error() const;

private:
    Eigen::MatrixXcd matrix_;
    HilbertLayout layout_;
};

// Operator matrices in a layout.
Eigen::MatrixXcd annihilation_op(const HilbertLayout& layout);
Eigen::MatrixXcd lowering_op(const HilbertLayout& layout, std::size_t emitter);
Eigen::MatrixXcd pauli_z_op(const HilbertLayout& layout, std::size_t emitter);

Eigen::VectorXcd vectorize(const Eigen::MatrixXcd& rho);
Eigen::MatrixXcd unvectorize(const Eigen::VectorXcd& vec, std::size_t dim);

Liouvillian build_liouvillian(const SystemModel& model, const HilbertLayout& layout,
                              const DriveParams& drive);

// Solves Lρ = 0 with Tr ρ = 1. Throws degenerate_kernel when the kernel is
// not one-dimensional.
DensityState steady_state(const Liouvillian& liouvillian);

struct OracleResult {
    double transmission{0.0};
    std::complex<double> field{0.0, 0.0}; // ⟨a⟩
    double photon_number{0.0};
    double max_excitation{0.0};           // max_i ⟨σ_i†σ_i⟩
};

OracleResult transmission_oracle(const SystemModel& model, const HilbertLayout& layout,
                                 double omega_L, double alpha_in);

struct ConvergenceRow {
    std::size_t n_max{0};
    double transmission{0.0};
    double max_excitation{0.0};
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    // Cutoff at which T first agrees with the previous cutoff to 1e−6 relative.
    std::optional<std::size_t> converged_at;
    bool converged() const noexcept { return converged_at.has_value(); }
};

ConvergenceTable convergence_check(const SystemModel& model, double omega_L, double alpha_in,
                                   std::span<const std::size_t> n_max_list,
                                   double rel_tol = 1e-6);

} // namespace cqed
