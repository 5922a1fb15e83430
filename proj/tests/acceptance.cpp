// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "cqed/collective.hpp"
#include "cqed/ensemble.hpp"
#include "cqed/fitkit.hpp"
#include "cqed/oracle.hpp"
#include "cqed/qed_core.hpp"
#include "cqed/spectrum.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

using namespace cqed;

namespace {

struct Outcome {
    bool pass{false};
    std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("[%s] %2d %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, title,
                o.detail.c_str(), secs);
    std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

bool within_rel(double x, double target, double rel) {
    return std::abs(x - target) <= rel * std::abs(target);
}

double percentile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size()))) - 1;
    return v[std::min(k, v.size() - 1)];
}

double elapsed_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

constexpr double kappa = 45.0;
constexpr double gamma_prime = 0.040;

} // namespace

int main() {
    criterion(1, "Cooperativity", [] {
        const double c = cooperativity(0.6, kappa, 0.06);
        return Outcome{std::abs(c - 0.533) <= 0.005, fmt("C = %.4f, target 0.533 +/- 0.005", c)};
    });

    criterion(2, "Lifetimes", [] {
        const double far = excited_lifetime(gamma_prime, gamma_1d(0.6, kappa, -31.0));
        const double near = excited_lifetime(gamma_prime, gamma_1d(0.6, kappa, 5.6));
        const bool ok = within_rel(far, 3.13, 0.02) && within_rel(near, 2.2, 0.05);
        return Outcome{ok, fmt("tau(-31 GHz) = %.3f ns", far) + fmt(", tau(5.6 GHz) = %.3f ns", near)};
    });

    criterion(3, "Characterization inverse", [] {
        const auto m = characterize_molecule(3.13, -31.0, 2.2, 5.6, kappa);
        const bool ok = within_rel(m.g, 0.6, 0.10) && within_rel(m.gamma_prime, 0.040, 0.10);
        return Outcome{ok, fmt("g = %.4f GHz", m.g) + fmt(", Gamma' = %.2f MHz", 1e3 * m.gamma_prime)};
    });

    criterion(4, "Purcell factor and beta", [] {
        const Emitter e{5.6, 0.6, gamma_prime, 0.33, 0.010};
        const double g1d = gamma_1d(e.g, kappa, e.omega_0);
        const double fp = purcell_factor(g1d, e.gamma_zpl());
        const double beta = beta_factor(g1d, e.gamma_prime);
        const bool ok = fp >= 2.1 && fp <= 2.5 && beta >= 0.42 && beta <= 0.46;
        return Outcome{ok, fmt("F_P = %.3f", fp) + fmt(", beta = %.2f%%", 100.0 * beta)};
    });

    criterion(5, "Collective rates (pairs B and C)", [] {
        const double kappa_b = implied_kappa(0.010, 0.039, 5.7);
        const std::vector<double> gb{0.56, 0.48};
        const auto b = collective_rates(gb, kappa_b, 5.7);
        const std::vector<double> gc{0.61, 0.65};
        const auto c = collective_rates(gc, 43.0, -17.0);
        const double jb = 1e3 * b.j(0, 1), gmb = 1e3 * b.gamma(0, 1);
        const double jc = 1e3 * c.j(0, 1), gmc = 1e3 * c.gamma(0, 1);
        const bool ok = std::abs(jb + 10.0) <= 1.0 && std::abs(gmb - 39.0) <= 2.0 &&
                        std::abs(jc - 8.7) <= 0.5 && std::abs(gmc - 22.0) <= 1.5;
        return Outcome{ok, fmt("B: kappa = %.2f GHz", kappa_b) + fmt(", J12 = %.2f MHz", jb) +
                               fmt(", Gamma12 = %.2f MHz", gmb) + fmt("; C: J12 = %.2f MHz", jc) +
                               fmt(", Gamma12 = %.2f MHz", gmc)};
    });

    criterion(6, "Oracle equivalence (N = 1, 2; n_max = 3)", [] {
        const auto t0 = std::chrono::steady_clock::now();
        const CavityParams cav = CavityParams::symmetric(0.0, kappa);
        const std::vector<SystemModel> models{
            {cav, {Emitter{0.0, 0.6, gamma_prime, 0.33, 0.010}}},
            {cav, {Emitter{0.0, 0.56, gamma_prime, 0.33, 0.0}, Emitter{13.5, 0.48, gamma_prime, 0.33, 0.010}}},
        };
        const auto grid = cavity_grid(cav, 201);
        double max_dev = 0.0;
        double max_exc = 0.0;
        double min_ratio = 1e300;
        for (const auto& model : models) {
            for (const auto& e : model.emitters) min_ratio = std::min(min_ratio, kappa / e.gamma());
            const HilbertLayout layout{model.emitters.size(), 3};
            for (double w : grid) {
                const auto r = transmission_oracle(model, layout, w, 0.003);
                const double t = transmission_multi(model, w);
                max_dev = std::max(max_dev, std::abs(r.transmission - t) / t);
                max_exc = std::max(max_exc, r.max_excitation);
            }
        }
        const double secs = elapsed_since(t0);
        const bool ok = max_dev < 0.01 && max_exc < 1e-3 && min_ratio >= 100.0 && secs < 60.0;
        return Outcome{ok, fmt("max rel dev = %.2e", max_dev) + fmt(", max excitation = %.2e", max_exc) +
                               fmt(", min kappa/gamma = %.0f", min_ratio)};
    });

    criterion(7, "Dip depth law", [] {
        bool ok = true;
        std::string detail;
        for (double c : {0.001, 0.01, 0.05}) {
            const double g = std::sqrt(c * kappa * gamma_prime / 4.0);
            const SystemModel model{CavityParams::symmetric(0.0, kappa),
                                    {Emitter{0.0, g, gamma_prime, 0.33, 0.0}}};
            const double depth = dip_depth(model);
            const double exact = 1.0 - 1.0 / ((1.0 + c) * (1.0 + c));
            ok = ok && std::abs(depth - exact) <= 1e-6;
            if (c <= 0.01) ok = ok && within_rel(depth, 2.0 * c, 0.05);
            detail += fmt("C=%g: ", c) + fmt("dT = %.6e", depth) +
                      fmt(" (2C dev %.2f%%); ", 100.0 * std::abs(depth / (2.0 * c) - 1.0));
        }
        return Outcome{ok, detail};
    });

    criterion(8, "Subradiance invariant", [] {
        const std::vector<Emitter> emitters{Emitter{0.0, 0.6, gamma_prime, 0.33, 0.0},
                                            Emitter{0.0, 0.6, gamma_prime, 0.33, 0.0}};
        const std::vector<double> g{0.6, 0.6};
        const auto rates = collective_rates(g, kappa, 0.0);
        const auto modes = dressed_modes(emitters, rates);
        double dark = 1e300;
        for (std::size_t k = 0; k < modes.eigenvalues.size(); ++k) {
            const auto& v = modes.eigenvectors[k];
            if (std::abs(v[0] + v[1]) < 1e-6) dark = modes.linewidth(k);
        }
        const bool ok = std::abs(dark - gamma_prime) <= 1e-9 * gamma_prime;
        return Outcome{ok, fmt("antisymmetric linewidth = %.12f GHz", dark)};
    });

    criterion(9, "Fit round-trips", [] {
        const auto t0 = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = true;

        // Lorentzian
        {
            const double wc = 384349.0;
            const auto grid = uniform_grid(wc, 2.0 * kappa, 500);
            auto make = [&](double sigma, std::uint64_t seed) {
                Spectrum s;
                s.frequencies = grid;
                std::mt19937_64 rng(seed);
                std::normal_distribution<double> noise(0.0, sigma);
                for (double w : grid) {
                    s.values.push_back(lorentzian_model({wc, kappa, 1.0, 0.0}, w) +
                                       (sigma > 0.0 ? noise(rng) : 0.0));
                }
                return s;
            };
            const auto exact = fit_lorentzian(make(0.0, 0));
            const double err = std::max(std::abs(exact.param("kappa") / kappa - 1.0),
                                        std::abs(exact.param("amplitude") - 1.0));
            std::vector<double> errs;
            for (std::uint64_t s = 0; s < 100; ++s) {
                errs.push_back(std::abs(fit_lorentzian(make(0.01, 1000 + s)).param("kappa") / kappa - 1.0));
            }
            const double p95 = percentile(errs, 0.95);
            ok = ok && err <= 1e-4 && p95 <= 0.02;
            detail += fmt("lorentzian exact %.1e", err) + fmt(", noisy p95 %.2f%%; ", 100.0 * p95);
        }

        // Antiresonance, single and joint
        {
            const Emitter truth{0.0, 0.6, gamma_prime, 0.33, 0.010};
            auto make = [&](double delta_mc, double sigma, std::uint64_t seed) {
                const CavityParams cav = CavityParams::symmetric(-delta_mc, kappa);
                const SystemModel model{cav, {truth}};
                const double center = truth.omega_0 - lamb_shift_1d(truth.g, kappa, delta_mc);
                const auto grid = uniform_grid(center, 1.5, 601);
                std::optional<double> noise;
                if (sigma > 0.0) noise = sigma;
                return AntiresonanceData{sample_spectrum(model, grid, noise, seed), cav,
                                         FrequencyWindow{center - 1.0, center + 1.0}};
            };
            const auto d = make(5.6, 0.0, 0);
            const auto single = fit_antiresonance(d.spectrum, d.cavity, d.window);
            const double err = std::max({std::abs(single.param("g") / truth.g - 1.0),
                                         std::abs(single.param("omega_0") - truth.omega_0) / kappa,
                                         std::abs(single.param("gamma_star") / truth.gamma_star - 1.0)});
            std::vector<double> errs;
            for (std::uint64_t s = 0; s < 100; ++s) {
                const std::vector<AntiresonanceData> data{make(5.6, 0.002, 2000 + 2 * s),
                                                          make(-31.0, 0.002, 2001 + 2 * s)};
                const auto joint = fit_antiresonance_joint(data);
                errs.push_back(std::abs(joint.param("gamma_star") / truth.gamma_star - 1.0));
            }
            const double p95 = percentile(errs, 0.95);
            ok = ok && err <= 1e-4 && p95 <= 0.20;
            detail += fmt("antiresonance exact %.1e", err) + fmt(", joint gamma* p95 %.1f%%; ", 100.0 * p95);
        }

        // Exponential decay
        {
            const double tau = 3.13;
            const auto exact = fit_exponential_decay(make_decay_histogram(tau, 1e4, 10.0, 200, 0.1));
            const double err = std::abs(exact.param("tau") / tau - 1.0);
            std::size_t good = 0;
            for (std::uint64_t s = 0; s < 100; ++s) {
                std::mt19937_64 rng(3000 + s);
                const auto h = make_decay_histogram(tau, 1e4, 10.0, 200, 0.1, 0.0, &rng);
                if (std::abs(fit_exponential_decay(h).param("tau") / tau - 1.0) <= 0.03) ++good;
            }
            ok = ok && err <= 1e-4 && good >= 95;
            detail += fmt("decay exact %.1e", err) + fmt(", noisy %g/100 within 3%%; ", static_cast<double>(good));
        }

        // Two-detuning characterization
        {
            const MoleculeParams truth{0.6, gamma_prime};
            const double t1 = lifetime_at_detuning(truth, kappa, -31.0);
            const double t2 = lifetime_at_detuning(truth, kappa, 5.6);
            const auto m = characterize_molecule(t1, -31.0, t2, 5.6, kappa);
            const double err = std::max(std::abs(m.g / truth.g - 1.0),
                                        std::abs(m.gamma_prime / truth.gamma_prime - 1.0));
            ok = ok && err <= 1e-4;
            detail += fmt("characterize exact %.1e", err);
        }
        const double secs = elapsed_since(t0);
        ok = ok && secs < 60.0;
        return Outcome{ok, detail};
    });

    criterion(10, "Ensemble statistics", [] {
        const auto t0 = std::chrono::steady_clock::now();
        EnsembleConfig cfg;
        const CavityParams cav = CavityParams::symmetric(ensemble_center_frequency(cfg), kappa);
        const double expected = cfg.density * effective_volume(cfg);
        double count = 0.0;
        double sum = 0.0;
        double sum2 = 0.0;
        const int draws = 10000;
        for (int k = 0; k < draws; ++k) {
            cfg.seed = 5000 + static_cast<std::uint64_t>(k);
            const auto em = sample_ensemble(cfg, cav);
            count += static_cast<double>(em.size());
            for (const auto& e : em) {
                const double d = e.omega_0 - cav.omega_c;
                sum += d;
                sum2 += d * d;
            }
        }
        const double mean_count = count / draws;
        const double mu = sum / count;
        const double sd = std::sqrt(sum2 / count - mu * mu);
        const double sd_err = cfg.sigma_inhom / std::sqrt(2.0 * count);
        const bool ok = within_rel(mean_count, expected, 0.02) &&
                        std::abs(sd - cfg.sigma_inhom) <= 4.0 * sd_err && elapsed_since(t0) < 10.0;
        return Outcome{ok, fmt("mean count = %.3f", mean_count) + fmt(" vs %.3f", expected) +
                               fmt(", std = %.2f GHz", sd) + fmt(" (+/- %.2f)", sd_err)};
    });

    criterion(11, "Tuning convergence", [] {
        const auto t0 = std::chrono::steady_clock::now();
        std::size_t converged = 0;
        bool capped = true;
        for (std::uint64_t s = 0; s < 100; ++s) {
            TuningConfig cfg;
            cfg.seed = 7000 + s;
            const Emitter a{0.0, 0.6, gamma_prime, 0.33, 0.0};
            const Emitter b{3.0, 0.6, gamma_prime, 0.33, 0.0};
            const auto r = tune_pair_to_resonance(a, b, cfg, 0.040, 10000);
            if (r.converged) ++converged;
            for (const auto& [w1, w2] : r.trajectory) {
                capped = capped && std::abs(w1 - a.omega_0) <= cfg.shift_cap &&
                         std::abs(w2 - b.omega_0) <= cfg.shift_cap;
            }
        }
        const bool ok = converged >= 99 && capped && elapsed_since(t0) < 30.0;
        return Outcome{ok, fmt("%g/100 converged", static_cast<double>(converged)) +
                               (capped ? ", cap respected" : ", cap violated")};
    });

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
