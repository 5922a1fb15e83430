#include "cqed/qed_core.hpp"

#include "cqed/errors.hpp"

#include <cmath>
#include <string>

namespace cqed {

namespace {
constexpr const char* kModule = "qed-core";

bool finite(double x) { return std::isfinite(x); }
} // namespace

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::invalid_parameter: return "invalid_parameter";
    case ErrorKind::contract: return "contract";
    case ErrorKind::input: return "input";
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::degenerate_kernel: return "degenerate_kernel";
    case ErrorKind::no_feature: return "no_feature";
    case ErrorKind::no_dip: return "no_dip";
    case ErrorKind::ambiguous_window: return "ambiguous_window";
    case ErrorKind::no_decay: return "no_decay";
    case ErrorKind::singular_system: return "singular_system";
    case ErrorKind::inconsistent_data: return "inconsistent_data";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
    }
    return "unknown";
}

void CavityParams::validate() const {
    const char* op = "CavityParams";
    require(finite(omega_c), kModule, op, "omega_c must be finite");
    require(finite(kappa) && kappa > 0.0, kModule, op, "kappa must be > 0");
    require(finite(kappa_left) && kappa_left >= 0.0, kModule, op, "kappa_left must be >= 0");
    require(finite(kappa_right) && kappa_right >= 0.0, kModule, op, "kappa_right must be >= 0");
    // Relative slack so κ/2 + κ/2 never trips on rounding.
    require(kappa_left + kappa_right <= kappa * (1.0 + 1e-12), kModule, op,
            "kappa_left + kappa_right must not exceed kappa");
}

void Emitter::validate() const {
    const char* op = "Emitter";
    require(finite(omega_0), kModule, op, "omega_0 must be finite");
    require(finite(g) && g >= 0.0, kModule, op, "g must be >= 0");
    require(finite(gamma_prime) && gamma_prime > 0.0, kModule, op, "gamma_prime must be > 0");
    require(finite(gamma_star) && gamma_star >= 0.0, kModule, op, "gamma_star must be >= 0");
    require(finite(branching_zpl) && branching_zpl >= 0.0 && branching_zpl <= 1.0, kModule, op,
            "branching_zpl must lie in [0, 1]");
}

void SystemModel::validate() const {
    cavity.validate();
    for (const auto& e : emitters) e.validate();
}

Detunings detunings(const SystemModel& model, double omega_L) {
    Detunings d;
    d.delta_c = omega_L - model.cavity.omega_c;
    d.delta_i.reserve(model.emitters.size());
    d.delta_mc.reserve(model.emitters.size());
    for (const auto& e : model.emitters) {
        d.delta_i.push_back(omega_L - e.omega_0);
        d.delta_mc.push_back(e.omega_0 - model.cavity.omega_c);
    }
    return d;
}

double gamma_1d(double g, double kappa, double delta_mc) {
    require(kappa > 0.0, kModule, "gamma_1d", "kappa must be > 0");
    require(finite(g) && finite(delta_mc) && finite(kappa), kModule, "gamma_1d",
            "inputs must be finite");
    const double half = 0.5 * kappa;
    return g * g * kappa / (half * half + delta_mc * delta_mc);
}

double cooperativity(double g, double kappa, double gamma) {
    require(kappa > 0.0, kModule, "cooperativity", "kappa must be > 0");
    require(gamma > 0.0, kModule, "cooperativity", "gamma must be > 0");
    require(finite(g), kModule, "cooperativity", "g must be finite");
    return 4.0 * g * g / (kappa * gamma);
}

double purcell_factor(double gamma_1d, double gamma_zpl) {
    require(gamma_zpl > 0.0, kModule, "purcell_factor", "gamma_zpl must be > 0");
    return gamma_1d / gamma_zpl;
}

double beta_factor(double gamma_1d, double gamma_prime) {
    require(gamma_1d >= 0.0 && gamma_prime >= 0.0, kModule, "beta_factor",
            "rates must be >= 0");
    require(gamma_1d + gamma_prime > 0.0, kModule, "beta_factor",
            "gamma_1d + gamma_prime must be > 0");
    return gamma_1d / (gamma_1d + gamma_prime);
}

double excited_lifetime(double gamma_prime, double gamma_1d) {
    const double total = gamma_prime + gamma_1d;
    require(total > 0.0, kModule, "excited_lifetime", "total decay rate must be > 0");
    return 1.0 / (two_pi * total);
}

double total_rate_from_lifetime(double tau_ns) {
    require(tau_ns > 0.0, kModule, "total_rate_from_lifetime", "lifetime must be > 0");
    return 1.0 / (two_pi * tau_ns);
}

double quality_factor(double omega_c_thz, double kappa_ghz) {
    require(omega_c_thz > 0.0 && kappa_ghz > 0.0, kModule, "quality_factor",
            "omega_c and kappa must be > 0");
    return omega_c_thz * 1000.0 / kappa_ghz;
}

double kappa_from_q(double omega_c_thz, double q) {
    require(omega_c_thz > 0.0 && q > 0.0, kModule, "kappa_from_q", "omega_c and Q must be > 0");
    return omega_c_thz * 1000.0 / q;
}

double frequency_from_wavelength(double wavelength_nm) {
    require(wavelength_nm > 0.0, kModule, "frequency_from_wavelength",
            "wavelength must be > 0");
    return speed_of_light_nm_ghz / wavelength_nm;
}

} // namespace cqed
