#include "cqed/fitkit.hpp"

#include "cqed/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace cqed {

namespace {
constexpr const char* kModule = "fitkit";
constexpr double kResidualFloor = 1e-12;

double scaled_gradient(const Eigen::MatrixXd& jac, const Eigen::VectorXd& r) {
    const double rn = r.norm();
    if (rn == 0.0) return 0.0;
    double worst = 0.0;
    for (Eigen::Index k = 0; k < jac.cols(); ++k) {
        const double cn = jac.col(k).norm();
        if (cn == 0.0) continue;
        worst = std::max(worst, std::abs(jac.col(k).dot(r)) / (cn * rn));
    }
    return worst;
}

Eigen::MatrixXd psd_pseudo_inverse(const Eigen::MatrixXd& a) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (a + a.transpose()));
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double cutoff = ev.cwiseAbs().maxCoeff() * 1e-14 * static_cast<double>(ev.size());
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev[i] > cutoff) inv[i] = 1.0 / ev[i];
    }
    const Eigen::MatrixXd& v = es.eigenvectors();
    Eigen::MatrixXd out = v * inv.asDiagonal() * v.transpose();
    return 0.5 * (out + out.transpose());
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    return *mid;
}

// Robust noise estimate from successive differences.
double noise_estimate(std::span<const double> values) {
    if (values.size() < 3) return 0.0;
    std::vector<double> diffs;
    diffs.reserve(values.size() - 1);
    for (std::size_t i = 1; i < values.size(); ++i) diffs.push_back(std::abs(values[i] - values[i - 1]));
    return 1.4826 * median(std::move(diffs)) / std::sqrt(2.0);
}

struct WindowSlice {
    std::vector<double> freq;
    std::vector<double> value;
};

WindowSlice slice_window(const Spectrum& s, FrequencyWindow w, const char* op) {
    require(w.hi > w.lo, kModule, op, "window must satisfy lo < hi");
    WindowSlice out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.frequencies[i] >= w.lo && s.frequencies[i] <= w.hi) {
            out.freq.push_back(s.frequencies[i]);
            out.value.push_back(s.values[i]);
        }
    }
    if (out.freq.size() < 5) {
        throw Error(ErrorKind::input, kModule, op, "fewer than 5 samples inside the window");
    }
    return out;
}

Emitter emitter_from(const AntiresonanceGuess& guess, double g, double omega_0, double gamma_star) {
    Emitter e;
    e.omega_0 = omega_0;
    e.g = std::abs(g);
    e.gamma_prime = guess.gamma_prime;
    e.branching_zpl = guess.branching_zpl;
    e.gamma_star = std::abs(gamma_star);
    return e;
}

struct DipStart {
    double dip_freq;
    double g;
    double omega_0;
};

// Starting values for one antiresonance from its deepest point.
DipStart dip_start(const Spectrum& s, const CavityParams& cav, FrequencyWindow window,
                   const AntiresonanceGuess& guess, double gamma_star) {
    const double dip = locate_dip(s, cav, window);
    // Ratio of data to the bare cavity at the dip.
    std::size_t idx = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.frequencies[i] == dip) idx = i;
    }
    const double bare = transmission_bare(cav, dip);
    const double r = std::clamp(s.values[idx] / bare, 1e-6, 1.0 - 1e-9);
    const double gamma = guess.gamma_prime + 2.0 * gamma_star;
    const double g1d = gamma * (1.0 / std::sqrt(r) - 1.0);
    const double dmc = dip - cav.omega_c;
    const double half = 0.5 * cav.kappa;
    const double g =
        guess.g.value_or(std::sqrt(std::max(g1d, 1e-12) * (half * half + dmc * dmc) / cav.kappa));
    // Dip sits at ω_0 − J.
    const double omega_0 = guess.omega_0.value_or(dip + lamb_shift_1d(g, cav.kappa, dmc));
    return {dip, g, omega_0};
}

void check_finite_result(const FitResult& r, const char* op) {
    if (!r.values.allFinite()) throw Error(ErrorKind::numeric, kModule, op, "non-finite fit");
}
} // namespace

double FitResult::param(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return values[static_cast<Eigen::Index>(i)];
    }
    throw Error(ErrorKind::contract, kModule, "FitResult::param",
                "no parameter named " + std::string(name));
}

double FitResult::stderr_of(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) {
            const auto k = static_cast<Eigen::Index>(i);
            return std::sqrt(std::max(0.0, covariance(k, k)));
        }
    }
    throw Error(ErrorKind::contract, kModule, "FitResult::stderr_of",
                "no parameter named " + std::string(name));
}

std::vector<std::pair<std::string, double>> FitResult::parameters() const {
    std::vector<std::pair<std::string, double>> out;
    for (std::size_t i = 0; i < names.size(); ++i) {
        out.emplace_back(names[i], values[static_cast<Eigen::Index>(i)]);
    }
    return out;
}

Eigen::MatrixXd numeric_jacobian(const ResidualFn& fn, const Eigen::VectorXd& p) {
    Eigen::MatrixXd jac;
    Eigen::VectorXd q = p;
    for (Eigen::Index k = 0; k < p.size(); ++k) {
        const double h = std::max(1e-6 * std::abs(p[k]), 1e-9);
        q[k] = p[k] + h;
        const Eigen::VectorXd plus = fn(q);
        q[k] = p[k] - h;
        const Eigen::VectorXd minus = fn(q);
        q[k] = p[k];
        if (k == 0) jac.resize(plus.size(), p.size());
        jac.col(k) = (plus - minus) / (2.0 * h);
    }
    return jac;
}

FitResult nlls_solve(const ResidualFn& fn, const Eigen::VectorXd& initial,
                     std::vector<std::string> names, const NllsOptions& options) {
    const auto n = initial.size();
    require(n > 0, kModule, "nlls_solve", "no parameters");
    if (names.empty()) {
        for (Eigen::Index k = 0; k < n; ++k) names.push_back("p" + std::to_string(k));
    }
    require(static_cast<Eigen::Index>(names.size()) == n, kModule, "nlls_solve",
            "parameter name count does not match parameter count");

    Eigen::VectorXd p = initial;
    Eigen::VectorXd r = fn(p);
    if (!r.allFinite() || !p.allFinite()) {
        throw Error(ErrorKind::numeric, kModule, "nlls_solve", "non-finite residual at initial point");
    }
    const auto m = r.size();
    double cost = 0.5 * r.squaredNorm();

    FitResult out;
    out.names = std::move(names);
    out.cost_history.push_back(cost);

    double lambda = options.initial_lambda;
    Eigen::MatrixXd jac = numeric_jacobian(fn, p);
    std::size_t iter = 0;
    while (iter < options.max_iterations) {
        if (r.cwiseAbs().maxCoeff() <= kResidualFloor ||
            scaled_gradient(jac, r) <= options.gradient_tol) {
            break;
        }
        ++iter;
        const Eigen::MatrixXd a = jac.transpose() * jac;
        const Eigen::VectorXd grad = jac.transpose() * r;
        Eigen::VectorXd diag = a.diagonal();
        for (Eigen::Index k = 0; k < n; ++k) diag[k] = std::max(diag[k], 1e-300);

        bool accepted = false;
        bool small_step = false;
        // The undamped Gauss-Newton step is tried first; damping takes over
        // as soon as it fails to lower the cost.
        bool gauss_newton = true;
        while (lambda < 1e16) {
            Eigen::MatrixXd damped = a;
            if (!gauss_newton) damped.diagonal() += lambda * diag;
            const Eigen::VectorXd step = damped.ldlt().solve(-grad);
            const Eigen::VectorXd trial = p + step;
            Eigen::VectorXd r_trial;
            if (step.allFinite()) r_trial = fn(trial);
            const double trial_cost =
                (step.allFinite() && r_trial.allFinite()) ? 0.5 * r_trial.squaredNorm()
                                                          : std::numeric_limits<double>::infinity();
            if (trial_cost < cost) {
                small_step = step.norm() <= options.step_tol * (p.norm() + options.step_tol);
                p = trial;
                r = std::move(r_trial);
                cost = trial_cost;
                out.cost_history.push_back(cost);
                lambda = std::max(lambda / options.lambda_down, 1e-15);
                accepted = true;
                break;
            }
            if (gauss_newton) {
                gauss_newton = false;
                continue;
            }
            lambda *= options.lambda_up;
        }
        if (!accepted) break;
        jac = numeric_jacobian(fn, p);
        if (small_step) break;
    }

    out.values = p;
    out.iterations = iter;
    out.residual_norm = r.norm();
    out.gradient_norm = scaled_gradient(jac, r);
    out.converged = r.cwiseAbs().maxCoeff() <= kResidualFloor ||
                    out.gradient_norm <= options.gradient_tol;
    const double dof = m > n ? static_cast<double>(m - n) : 1.0;
    out.covariance = psd_pseudo_inverse(jac.transpose() * jac) * (2.0 * cost / dof);
    return out;
}

double lorentzian_model(const LorentzianGuess& p, double omega) {
    const double half = 0.5 * p.kappa;
    const double d = omega - p.omega_c;
    return p.baseline + p.amplitude * half * half / (d * d + half * half);
}

FitResult fit_lorentzian(const Spectrum& spectrum, std::optional<LorentzianGuess> guess,
                         std::span<const double> sigma) {
    spectrum.validate();
    const char* op = "fit_lorentzian";
    const auto& f = spectrum.frequencies;
    const auto& v = spectrum.values;
    require(f.size() >= 5, kModule, op, "spectrum needs at least 5 points");
    require(sigma.empty() || sigma.size() == f.size(), kModule, op,
            "sigma must be empty or match the spectrum length");

    const auto [min_it, max_it] = std::minmax_element(v.begin(), v.end());
    const double range = *max_it - *min_it;
    const double noise = noise_estimate(v);
    const double scale = std::max(1.0, std::abs(median(v)));
    if (range <= std::max(10.0 * noise, 1e-12 * scale)) {
        throw Error(ErrorKind::no_feature, kModule, op,
                    "spectrum has no feature above the noise floor");
    }

    LorentzianGuess start;
    if (guess) {
        start = *guess;
    } else {
        const double med = median(v);
        const bool peak = (*max_it - med) >= (med - *min_it);
        // min/max_element return the first extremum: ties resolve to lower frequency.
        const std::size_t ic = static_cast<std::size_t>((peak ? max_it : min_it) - v.begin());
        start.omega_c = f[ic];
        start.baseline = peak ? *min_it : *max_it;
        start.amplitude = v[ic] - start.baseline;
        const double half_level = start.baseline + 0.5 * start.amplitude;
        auto crosses = [&](std::size_t i) {
            return peak ? v[i] <= half_level : v[i] >= half_level;
        };
        std::optional<double> left;
        std::optional<double> right;
        for (std::size_t i = ic; i-- > 0;) {
            if (crosses(i)) {
                const double t = (half_level - v[i]) / (v[i + 1] - v[i]);
                left = f[i] + t * (f[i + 1] - f[i]);
                break;
            }
        }
        for (std::size_t i = ic + 1; i < f.size(); ++i) {
            if (crosses(i)) {
                const double t = (half_level - v[i - 1]) / (v[i] - v[i - 1]);
                right = f[i - 1] + t * (f[i] - f[i - 1]);
                break;
            }
        }
        if (left && right) start.kappa = *right - *left;
        else if (left) start.kappa = 2.0 * (start.omega_c - *left);
        else if (right) start.kappa = 2.0 * (*right - start.omega_c);
        else start.kappa = 0.5 * (f.back() - f.front());
    }

    const double ref = start.omega_c;
    auto unpack = [ref](const Eigen::VectorXd& p) {
        return LorentzianGuess{ref + p[0], std::abs(p[1]), p[2], p[3]};
    };
    const std::vector<double> freq(f.begin(), f.end());
    const std::vector<double> data(v.begin(), v.end());
    const std::vector<double> w(sigma.begin(), sigma.end());
    ResidualFn fn = [unpack, freq, data, w](const Eigen::VectorXd& p) {
        const LorentzianGuess model = unpack(p);
        Eigen::VectorXd r(static_cast<Eigen::Index>(freq.size()));
        for (std::size_t i = 0; i < freq.size(); ++i) {
            double res = lorentzian_model(model, freq[i]) - data[i];
            if (!w.empty()) res /= w[i];
            r[static_cast<Eigen::Index>(i)] = res;
        }
        return r;
    };
    Eigen::VectorXd p0(4);
    p0 << 0.0, start.kappa, start.amplitude, start.baseline;
    FitResult result = nlls_solve(fn, p0, {"omega_c", "kappa", "amplitude", "baseline"});
    result.values[0] += ref;
    result.values[1] = std::abs(result.values[1]);
    check_finite_result(result, op);
    return result;
}

double locate_dip(const Spectrum& spectrum, const CavityParams& cavity, FrequencyWindow window) {
    const char* op = "locate_dip";
    spectrum.validate();
    const WindowSlice slice = slice_window(spectrum, window, op);
    std::vector<double> ratio(slice.freq.size());
    for (std::size_t i = 0; i < ratio.size(); ++i) {
        ratio[i] = slice.value[i] / transmission_bare(cavity, slice.freq[i]);
    }
    // On noisy data, search a 5-point running mean and demand a prominence
    // above the expected extreme of pure noise over the window.
    const double sigma = noise_estimate(ratio);
    double threshold = 1e-9;
    if (sigma > 1e-9 && ratio.size() >= 5) {
        std::vector<double> smooth(ratio.size());
        for (std::size_t i = 0; i < ratio.size(); ++i) {
            const std::size_t lo = i < 2 ? 0 : i - 2;
            const std::size_t hi = std::min(ratio.size() - 1, i + 2);
            double sum = 0.0;
            for (std::size_t k = lo; k <= hi; ++k) sum += ratio[k];
            smooth[i] = sum / static_cast<double>(hi - lo + 1);
        }
        ratio = std::move(smooth);
        const double n = static_cast<double>(ratio.size());
        threshold = std::max(threshold, (2.0 * std::sqrt(2.0 * std::log(n)) + 2.0) * sigma / std::sqrt(5.0));
    }
    const auto minima = find_local_minima(ratio, threshold);
    if (minima.empty()) {
        throw Error(ErrorKind::no_dip, kModule, op, "no local minimum inside the window");
    }
    if (minima.size() > 1) {
        throw Error(ErrorKind::ambiguous_window, kModule, op,
                    std::to_string(minima.size()) + " minima inside the window");
    }
    return slice.freq[minima.front()];
}

FitResult fit_antiresonance(const Spectrum& spectrum, const CavityParams& cavity_fixed,
                            FrequencyWindow window, const AntiresonanceGuess& guess) {
    AntiresonanceData d{spectrum, cavity_fixed, window};
    FitResult joint = fit_antiresonance_joint(std::span<const AntiresonanceData>(&d, 1), guess);
    // Reorder to (g, omega_0, gamma_star).
    FitResult out = joint;
    const std::vector<Eigen::Index> order{0, 2, 1};
    out.names = {"g", "omega_0", "gamma_star"};
    for (std::size_t i = 0; i < 3; ++i) {
        out.values[static_cast<Eigen::Index>(i)] = joint.values[order[i]];
        for (std::size_t j = 0; j < 3; ++j) {
            out.covariance(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                joint.covariance(order[i], order[j]);
        }
    }
    return out;
}

FitResult fit_antiresonance_joint(std::span<const AntiresonanceData> data,
                                  const AntiresonanceGuess& guess) {
    const char* op = "fit_antiresonance";
    require(!data.empty(), kModule, op, "no spectra supplied");
    require(guess.gamma_prime > 0.0, kModule, op, "gamma_prime must be > 0");
    const double gamma_star0 = guess.gamma_star.value_or(0.25 * guess.gamma_prime);

    struct Block {
        CavityParams cavity;
        WindowSlice slice;
        double ref; // reference frequency for the omega_0 offset
    };
    std::vector<Block> blocks;
    double g0 = 0.0;
    std::vector<double> omega_starts;
    for (const auto& d : data) {
        d.cavity.validate();
        const DipStart start = dip_start(d.spectrum, d.cavity, d.window, guess, gamma_star0);
        blocks.push_back({d.cavity, slice_window(d.spectrum, d.window, op), start.omega_0});
        g0 += start.g / static_cast<double>(data.size());
        omega_starts.push_back(start.omega_0);
    }
    if (guess.g) g0 = *guess.g;

    ResidualFn fn = [&blocks, &guess](const Eigen::VectorXd& p) {
        std::size_t total = 0;
        for (const auto& b : blocks) total += b.slice.freq.size();
        Eigen::VectorXd r(static_cast<Eigen::Index>(total));
        Eigen::Index row = 0;
        for (std::size_t k = 0; k < blocks.size(); ++k) {
            const auto& b = blocks[k];
            const Emitter e = emitter_from(guess, p[0], b.ref + p[2 + static_cast<Eigen::Index>(k)], p[1]);
            const SystemModel model{b.cavity, {e}};
            for (std::size_t i = 0; i < b.slice.freq.size(); ++i) {
                r[row++] = transmission_single(model, b.slice.freq[i]) - b.slice.value[i];
            }
        }
        return r;
    };

    const auto n = static_cast<Eigen::Index>(2 + blocks.size());
    Eigen::VectorXd p0 = Eigen::VectorXd::Zero(n);
    p0[0] = g0;
    p0[1] = gamma_star0;
    std::vector<std::string> names{"g", "gamma_star"};
    for (std::size_t k = 0; k < blocks.size(); ++k) names.push_back("omega_0_" + std::to_string(k));

    FitResult result = nlls_solve(fn, p0, names);
    result.values[0] = std::abs(result.values[0]);
    result.values[1] = std::abs(result.values[1]);
    for (std::size_t k = 0; k < blocks.size(); ++k) result.values[2 + static_cast<Eigen::Index>(k)] += blocks[k].ref;
    check_finite_result(result, op);
    return result;
}

void DecayHistogram::validate() const {
    const char* op = "DecayHistogram";
    auto fail = [op](const std::string& msg) { throw Error(ErrorKind::input, kModule, op, msg); };
    if (bin_times.size() != counts.size()) fail("bin_times and counts differ in length");
    if (!(bin_width > 0.0) || !std::isfinite(bin_width)) fail("bin_width must be > 0");
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (!std::isfinite(counts[i]) || counts[i] < 0.0) fail("negative or non-finite count at bin " + std::to_string(i));
        if (!std::isfinite(bin_times[i])) fail("non-finite bin time at bin " + std::to_string(i));
        if (i > 0) {
            const double dt = bin_times[i] - bin_times[i - 1];
            if (std::abs(dt - bin_width) > 1e-6 * bin_width) fail("non-uniform bins at bin " + std::to_string(i));
        }
    }
}

DecayHistogram make_decay_histogram(double tau, double amplitude, double background,
                                    std::size_t bins, double bin_width, double t0,
                                    std::mt19937_64* rng) {
    require(tau > 0.0 && bin_width > 0.0, kModule, "make_decay_histogram",
            "tau and bin_width must be > 0");
    DecayHistogram h;
    h.bin_width = bin_width;
    for (std::size_t k = 0; k < bins; ++k) {
        const double t = t0 + bin_width * static_cast<double>(k);
        const double mean = amplitude * std::exp(-t / tau) + background;
        double c = mean;
        if (rng) {
            std::poisson_distribution<long> pd(std::max(mean, 0.0));
            c = static_cast<double>(pd(*rng));
        }
        h.bin_times.push_back(t);
        h.counts.push_back(c);
    }
    return h;
}

FitResult fit_exponential_decay(const DecayHistogram& hist) {
    const char* op = "fit_exponential_decay";
    hist.validate();
    require(hist.counts.size() >= 10, kModule, op, "need at least 10 bins");
    const auto& t = hist.bin_times;
    const auto& c = hist.counts;
    const std::size_t n = c.size();
    const double span = t.back() - t.front();

    const auto [mn, mx] = std::minmax_element(c.begin(), c.end());
    if (!(*mx - *mn > 0.0)) {
        throw Error(ErrorKind::no_decay, kModule, op, "histogram is constant");
    }

    const std::size_t tail = std::max<std::size_t>(1, n / 10);
    const double b0 = std::accumulate(c.end() - static_cast<std::ptrdiff_t>(tail), c.end(), 0.0) /
                      static_cast<double>(tail);
    const double a_front = c.front() - b0;
    double tau0 = span / 3.0;
    for (std::size_t i = 1; i < n; ++i) {
        if (c[i] - b0 < a_front / std::exp(1.0)) {
            tau0 = std::max(t[i] - t.front(), hist.bin_width);
            break;
        }
    }
    const double a0 = a_front * std::exp(t.front() / tau0);

    const std::vector<double> times(t.begin(), t.end());
    std::vector<double> inv_sigma(n);
    for (std::size_t i = 0; i < n; ++i) inv_sigma[i] = 1.0 / std::sqrt(std::max(c[i], 1.0));
    const std::vector<double> counts(c.begin(), c.end());
    ResidualFn fn = [times, counts, inv_sigma](const Eigen::VectorXd& p) {
        Eigen::VectorXd r(static_cast<Eigen::Index>(times.size()));
        if (!(p[0] > 0.0)) {
            r.setConstant(1e150);
            return r;
        }
        for (std::size_t i = 0; i < times.size(); ++i) {
            const double model = p[1] * std::exp(-times[i] / p[0]) + p[2];
            r[static_cast<Eigen::Index>(i)] = (model - counts[i]) * inv_sigma[i];
        }
        return r;
    };
    Eigen::VectorXd p0(3);
    p0 << tau0, a0, b0;
    FitResult result = nlls_solve(fn, p0, {"tau", "amplitude", "background"});
    check_finite_result(result, op);

    const double tau = result.values[0];
    const double amp = result.values[1];
    const double amp_err = std::sqrt(std::max(0.0, result.covariance(1, 1)));
    if (!(tau > 0.0) || tau > 100.0 * span || !(amp > 0.0) || amp < 3.0 * amp_err) {
        throw Error(ErrorKind::no_decay, kModule, op, "no significant exponential decay in data");
    }
    return result;
}

MoleculeParams characterize_molecule(double tau1, double delta1, double tau2, double delta2,
                                     double kappa) {
    const char* op = "characterize_molecule";
    require(kappa > 0.0, kModule, op, "kappa must be > 0");
    require(tau1 > 0.0 && tau2 > 0.0, kModule, op, "lifetimes must be > 0");
    const double half = 0.5 * kappa;
    const double l1 = kappa / (half * half + delta1 * delta1);
    const double l2 = kappa / (half * half + delta2 * delta2);
    if (std::abs(l1 - l2) <= 1e-12 * std::max(l1, l2)) {
        throw Error(ErrorKind::singular_system, kModule, op,
                    "|delta1| == |delta2|: lifetimes do not separate g from Gamma'");
    }
    const double r1 = total_rate_from_lifetime(tau1);
    const double r2 = total_rate_from_lifetime(tau2);
    const double g2 = (r1 - r2) / (l1 - l2);
    const double gp = r1 - g2 * l1;
    if (g2 < 0.0) {
        throw Error(ErrorKind::inconsistent_data, kModule, op,
                    "lifetimes imply g^2 < 0 (shorter lifetime must be nearer the cavity)");
    }
    if (!(gp > 0.0)) {
        throw Error(ErrorKind::inconsistent_data, kModule, op, "lifetimes imply Gamma' <= 0");
    }
    return {std::sqrt(g2), gp};
}

double lifetime_at_detuning(const MoleculeParams& molecule, double kappa, double delta_mc) {
    return excited_lifetime(molecule.gamma_prime, gamma_1d(molecule.g, kappa, delta_mc));
}

} // namespace cqed
