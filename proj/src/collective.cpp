#include "cqed/collective.hpp"

#include "cqed/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace cqed {

namespace {
constexpr const char* kModule = "collective";
using cd = std::complex<double>;
} // namespace

CollectiveRates collective_rates(std::span<const double> g, double kappa, double delta_mc) {
    require(kappa > 0.0, kModule, "collective_rates", "kappa must be > 0");
    const auto n = static_cast<Eigen::Index>(g.size());
    const double half = 0.5 * kappa;
    const double denom = delta_mc * delta_mc + half * half;
    CollectiveRates r;
    r.j.resize(n, n);
    r.gamma.resize(n, n);
    r.delta_mc = delta_mc;
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b < n; ++b) {
            const double gg = g[a] * g[b];
            r.j(a, b) = -gg * delta_mc / denom;
            r.gamma(a, b) = gg * kappa / denom;
        }
    }
    return r;
}

CollectiveRates collective_rates(const SystemModel& model, DetuningConvention convention) {
    model.validate();
    const auto& cav = model.cavity;
    std::vector<double> g;
    std::vector<double> dmc;
    for (const auto& e : model.emitters) {
        g.push_back(e.g);
        dmc.push_back(e.omega_0 - cav.omega_c);
    }
    const double mean = dmc.empty() ? 0.0
                                    : std::accumulate(dmc.begin(), dmc.end(), 0.0) /
                                          static_cast<double>(dmc.size());
    if (convention == DetuningConvention::common_mean) {
        return collective_rates(g, cav.kappa, mean);
    }

    const auto n = static_cast<Eigen::Index>(g.size());
    std::vector<cd> sqrt_chi(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        sqrt_chi[k] = std::sqrt(1.0 / cd(0.5 * cav.kappa, -dmc[k]));
    }
    CollectiveRates r;
    r.j.resize(n, n);
    r.gamma.resize(n, n);
    r.delta_mc = mean;
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b < n; ++b) {
            // J + iΓ/2 = i g_a g_b √χ_a √χ_b
            const cd c = cd(0.0, 1.0) * g[a] * g[b] * sqrt_chi[a] * sqrt_chi[b];
            r.j(a, b) = c.real();
            r.gamma(a, b) = 2.0 * c.imag();
        }
    }
    return r;
}

double implied_kappa(double j12_abs, double gamma12, double delta_mc_abs) {
    require(j12_abs > 0.0, kModule, "implied_kappa", "|J_12| must be > 0");
    require(gamma12 > 0.0 && delta_mc_abs > 0.0, kModule, "implied_kappa",
            "Gamma_12 and |delta_mc| must be > 0");
    return gamma12 * delta_mc_abs / j12_abs;
}

Eigen::MatrixXcd effective_hamiltonian(std::span<const Emitter> emitters,
                                       const CollectiveRates& rates) {
    const auto n = static_cast<Eigen::Index>(emitters.size());
    if (rates.j.rows() != n || rates.j.cols() != n || rates.gamma.rows() != n ||
        rates.gamma.cols() != n) {
        throw Error(ErrorKind::contract, kModule, "dressed_modes",
                    "rate matrices are " + std::to_string(rates.j.rows()) + "x" +
                        std::to_string(rates.j.cols()) + " but there are " +
                        std::to_string(n) + " emitters");
    }
    Eigen::MatrixXcd h(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b < n; ++b) {
            double re = -rates.j(a, b);
            double decay = rates.gamma(a, b);
            if (a == b) {
                re += emitters[a].omega_0;
                decay += emitters[a].gamma();
            }
            h(a, b) = cd(re, -0.5 * decay);
        }
    }
    return h;
}

DressedModes dressed_modes(std::span<const Emitter> emitters, const CollectiveRates& rates) {
    const Eigen::MatrixXcd h = effective_hamiltonian(emitters, rates);
    DressedModes out;
    const auto n = h.rows();
    if (n == 0) return out;

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(h, true);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorKind::numeric, kModule, "dressed_modes", "eigensolver failed");
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const auto& vals = solver.eigenvalues();
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        if (vals[a].real() != vals[b].real()) return vals[a].real() < vals[b].real();
        return vals[a].imag() < vals[b].imag();
    });
    for (auto k : order) {
        out.eigenvalues.push_back(vals[k]);
        Eigen::VectorXcd v = solver.eigenvectors().col(k);
        v.normalize();
        // Fix the global phase: largest component real and positive.
        Eigen::Index imax = 0;
        v.cwiseAbs().maxCoeff(&imax);
        if (std::abs(v[imax]) > 0.0) v *= std::conj(v[imax]) / std::abs(v[imax]);
        out.eigenvectors.push_back(std::move(v));
    }
    return out;
}

} // namespace cqed
