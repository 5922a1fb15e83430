#include "cqed/spectrum.hpp"

#include "cqed/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace cqed {

namespace {
constexpr const char* kModule = "spectrum";
using cd = std::complex<double>;
} // namespace

void Spectrum::validate() const {
    auto fail = [](const std::string& msg) {
        throw Error(ErrorKind::input, kModule, "Spectrum", msg);
    };
    if (frequencies.size() != values.size()) fail("frequency and value arrays differ in length");
    for (std::size_t i = 0; i < frequencies.size(); ++i) {
        if (!std::isfinite(frequencies[i]) || !std::isfinite(values[i])) {
            fail("non-finite entry at index " + std::to_string(i));
        }
        if (i > 0 && !(frequencies[i] > frequencies[i - 1])) {
            fail("frequencies not strictly increasing at index " + std::to_string(i));
        }
    }
}

std::complex<double> transmission_amplitude(const SystemModel& model, double omega_L) {
    model.validate();
    const auto& cav = model.cavity;
    cd denom(-0.5 * cav.kappa, omega_L - cav.omega_c);
    for (const auto& e : model.emitters) {
        const cd atom(-(0.5 * e.gamma_prime + e.gamma_star), omega_L - e.omega_0);
        denom += e.g * e.g / atom;
    }
    return -std::sqrt(cav.kappa_left * cav.kappa_right) / denom;
}

double transmission_single(const SystemModel& model, double omega_L) {
    if (model.emitters.size() != 1) {
        throw Error(ErrorKind::contract, kModule, "transmission_single",
                    "model must contain exactly one emitter, got " +
                        std::to_string(model.emitters.size()));
    }
    model.validate();
    const auto& cav = model.cavity;
    const auto& e = model.emitters.front();
    const double delta_c = omega_L - cav.omega_c;
    const double delta_0 = omega_L - e.omega_0;
    const cd denom = cd(-0.5 * cav.kappa, delta_c) + e.g * e.g / cd(-0.5 * e.gamma(), delta_0);
    return std::norm(std::sqrt(cav.kappa_left * cav.kappa_right) / denom);
}

double transmission_multi(const SystemModel& model, double omega_L) {
    return std::norm(transmission_amplitude(model, omega_L));
}

double transmission_bare(const CavityParams& cavity, double omega_L) {
    require(cavity.kappa > 0.0, kModule, "transmission_bare", "kappa must be > 0");
    const double d = omega_L - cavity.omega_c;
    const double half = 0.5 * cavity.kappa;
    return cavity.kappa_left * cavity.kappa_right / (d * d + half * half);
}

std::vector<double> uniform_grid(double center, double half_span, std::size_t points) {
    require(points >= 2, kModule, "uniform_grid", "grid needs at least two points");
    require(half_span > 0.0, kModule, "uniform_grid", "half_span must be > 0");
    std::vector<double> grid(points);
    const double step = 2.0 * half_span / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) {
        grid[i] = center - half_span + step * static_cast<double>(i);
    }
    grid.back() = center + half_span;
    return grid;
}

std::vector<double> cavity_grid(const CavityParams& cavity, std::size_t points,
                                double span_kappa) {
    return uniform_grid(cavity.omega_c, span_kappa * cavity.kappa, points);
}

Spectrum sample_spectrum(const SystemModel& model, std::span<const double> grid,
                         std::optional<double> noise_sigma, std::optional<std::uint64_t> seed) {
    model.validate();
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) {
            throw Error(ErrorKind::input, kModule, "sample_spectrum",
                        "grid not strictly increasing at index " + std::to_string(i));
        }
    }
    Spectrum s;
    s.frequencies.assign(grid.begin(), grid.end());
    s.values.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) s.values[i] = transmission_multi(model, grid[i]);

    const double sigma = noise_sigma.value_or(0.0);
    require(sigma >= 0.0, kModule, "sample_spectrum", "noise_sigma must be >= 0");
    if (sigma > 0.0) {
        const std::uint64_t used = seed.value_or(default_seed);
        std::mt19937_64 rng(used);
        std::normal_distribution<double> noise(0.0, sigma);
        for (auto& v : s.values) v += noise(rng);
        s.seed = used;
    }
    return s;
}

std::complex<double> antiresonance_ratio(const Emitter& emitter, double j1d, double gamma_1d,
                                         double delta_i) {
    const double gamma = emitter.gamma();
    const cd num(delta_i, 0.5 * gamma);
    const cd den(delta_i + j1d, 0.5 * (gamma + gamma_1d));
    if (den == cd(0.0, 0.0)) {
        throw Error(ErrorKind::numeric, kModule, "antiresonance_ratio", "evaluation at a pole");
    }
    return num / den;
}

double antiresonance_intensity_ratio(const Emitter& emitter, double j1d, double gamma_1d,
                                     double delta_i) {
    return std::norm(antiresonance_ratio(emitter, j1d, gamma_1d, delta_i));
}

double lamb_shift_1d(double g, double kappa, double delta_mc) {
    require(kappa > 0.0, kModule, "lamb_shift_1d", "kappa must be > 0");
    const double half = 0.5 * kappa;
    return -g * g * delta_mc / (delta_mc * delta_mc + half * half);
}

double dip_depth(const SystemModel& model) {
    if (model.emitters.size() != 1) {
        throw Error(ErrorKind::contract, kModule, "dip_depth",
                    "dip_depth needs exactly one emitter");
    }
    const double w0 = model.emitters.front().omega_0;
    return transmission_bare(model.cavity, w0) - transmission_multi(model, w0);
}

std::vector<std::size_t> find_local_minima(std::span<const double> values, double min_prominence) {
    std::vector<std::size_t> out;
    const std::size_t n = values.size();
    if (n < 3) return out;

    std::size_t i = 1;
    while (i + 1 < n) {
        if (!(values[i] < values[i - 1])) {
            ++i;
            continue;
        }
        // Walk across a flat bottom.
        std::size_t j = i;
        while (j + 1 < n && values[j + 1] == values[i]) ++j;
        if (j + 1 >= n || !(values[j + 1] > values[i])) {
            i = j + 1;
            continue;
        }
        const double v = values[i];
        double left_max = v;
        for (std::size_t k = i; k-- > 0;) {
            if (values[k] < v) break;
            left_max = std::max(left_max, values[k]);
        }
        double right_max = v;
        for (std::size_t k = j + 1; k < n; ++k) {
            if (values[k] < v) break;
            right_max = std::max(right_max, values[k]);
        }
        if (std::min(left_max, right_max) - v >= min_prominence) out.push_back(i);
        i = j + 1;
    }
    return out;
}

} // namespace cqed
