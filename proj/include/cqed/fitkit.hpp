// fitkit.hpp: damped nonlinear least squares and the characterization fitters
#pragma once

#include "cqed/qed_core.hpp"
#include "cqed/spectrum.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cqed {

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct NllsOptions {
    std::size_t max_iterations{200};
    double gradient_tol{1e-8};   // on max_k |cos(J_k, r)|
    double step_tol{1e-14};      // relative parameter change
    double initial_lambda{1e-3};
    double lambda_up{10.0};
    double lambda_down{10.0};
};

struct FitResult {
    std::vector<std::string> names;
    Eigen::VectorXd values;
    Eigen::MatrixXd covariance;
    double residual_norm{0.0};
    double gradient_norm{0.0};
    std::size_t iterations{0};
    bool converged{false};
    std::vector<double> cost_history; // ½‖r‖² at every accepted iterate

    double param(std::string_view name) const;
    double stderr_of(std::string_view name) const;
    std::vector<std::pair<std::string, double>> parameters() const;
};

// Central differences with step max(1e−6·|p_k|, 1e−9).
Eigen::MatrixXd numeric_jacobian(const ResidualFn& fn, const Eigen::VectorXd& p);

// Levenberg–Marquardt with Marquardt diagonal scaling. Throws numeric error
// if the residual is non-finite at the initial point; returns converged=false
// when the iteration budget runs out.
FitResult nlls_solve(const ResidualFn& fn, const Eigen::VectorXd& initial,
                     std::vector<std::string> names = {}, const NllsOptions& options = {});

// T(ω) = baseline + amplitude · (κ/2)² / ((ω − ω_c)² + (κ/2)²)
struct LorentzianGuess {
    double omega_c{0.0};
    double kappa{1.0};
    double amplitude{1.0};
    double baseline{0.0};
};

double lorentzian_model(const LorentzianGuess& p, double omega);

// Parameters: omega_c, kappa, amplitude, baseline. Throws no_feature on a
// spectrum without curvature above its noise floor.
FitResult fit_lorentzian(const Spectrum& spectrum,
                         std::optional<LorentzianGuess> guess = std::nullopt,
                         std::span<const double> sigma = {});

struct AntiresonanceGuess {
    double gamma_prime{0.040};        // held fixed
    double branching_zpl{0.33};
    std::optional<double> g;
    std::optional<double> omega_0;
    std::optional<double> gamma_star;
};

struct FrequencyWindow {
    double lo{0.0};
    double hi{0.0};
};

// Single-emitter fit with the cavity frozen. Parameters: g, omega_0, gamma_star.
FitResult fit_antiresonance(const Spectrum& spectrum, const CavityParams& cavity_fixed,
                            FrequencyWindow window, const AntiresonanceGuess& guess = {});

struct AntiresonanceData {
    Spectrum spectrum;
    CavityParams cavity;
    FrequencyWindow window;
};

// One molecule seen at several cavity detunings: shared g and γ*, one
// omega_0_<k> per spectrum.
FitResult fit_antiresonance_joint(std::span<const AntiresonanceData> data,
                                  const AntiresonanceGuess& guess = {});

// Location of the single dip in `window`; throws no_dip or ambiguous_window.
double locate_dip(const Spectrum& spectrum, const CavityParams& cavity, FrequencyWindow window);

struct DecayHistogram {
    std::vector<double> bin_times; // ns
    std::vector<double> counts;
    double bin_width{0.0};         // ns

    void validate() const;
};

// A·exp(−t/τ) + B sampled at t_k = t0 + k·bin_width; Poisson noise when rng given.
DecayHistogram make_decay_histogram(double tau, double amplitude, double background,
                                    std::size_t bins, double bin_width, double t0 = 0.0,
                                    std::mt19937_64* rng = nullptr);

// Parameters: tau, amplitude, background. Residuals weighted by
// 1/√max(counts, 1).
FitResult fit_exponential_decay(const DecayHistogram& hist);

struct MoleculeParams {
    double g{0.0};           // GHz
    double gamma_prime{0.0}; // GHz
};

// Solves 1/(2π τ_k) = Γ′ + g² κ / ((κ/2)² + Δ_k²) for k = 1, 2.
MoleculeParams characterize_molecule(double tau1, double delta1, double tau2, double delta2,
                                     double kappa);

// Forward model of characterize_molecule.
double lifetime_at_detuning(const MoleculeParams& molecule, double kappa, double delta_mc);

} // namespace cqed
