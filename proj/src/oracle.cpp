#include "cqed/oracle.hpp"

#include "cqed/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <string>

namespace cqed {

namespace {
constexpr const char* kModule = "oracle";
using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;

Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

// Adds rate·D[L] to the superoperator.
void add_dissipator(Mat& sup, const Mat& l, double rate) {
    if (rate == 0.0) return;
    const auto d = l.rows();
    const Mat id = Mat::Identity(d, d);
    const Mat ldl = l.adjoint() * l;
    sup += rate * (kron(l.conjugate(), l) - 0.5 * kron(id, ldl) - 0.5 * kron(ldl.transpose(), id));
}

void check_layout(const HilbertLayout& layout, const char* op) {
    require(layout.n_max >= 1, kModule, op, "n_max must be >= 1");
}
} // namespace

std::size_t HilbertLayout::index(std::span<const bool> excited, std::size_t photons) const {
    if (excited.size() != n_emitters || photons > n_max) {
        throw Error(ErrorKind::contract, kModule, "HilbertLayout::index",
                    "basis label outside the layout");
    }
    std::size_t bits = 0;
    for (bool e : excited) bits = (bits << 1) | (e ? 1u : 0u);
    return bits * fock_dim() + photons;
}

bool HilbertLayout::is_excited(std::size_t idx, std::size_t emitter) const {
    const std::size_t bits = idx / fock_dim();
    return ((bits >> (n_emitters - 1 - emitter)) & 1u) != 0;
}

std::size_t HilbertLayout::photons(std::size_t idx) const { return idx % fock_dim(); }

DensityState::DensityState(Eigen::MatrixXcd matrix, HilbertLayout layout)
    : matrix_(std::move(matrix)), layout_(layout) {
    if (static_cast<std::size_t>(matrix_.rows()) != layout_.dim() ||
        matrix_.rows() != matrix_.cols()) {
        throw Error(ErrorKind::contract, kModule, "DensityState", "matrix does not match layout");
    }
}

double DensityState::min_eigenvalue() const {
    const Mat herm = 0.5 * (matrix_ + matrix_.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat> solver(herm, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

double DensityState::hermiticity_error() const {
    return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
}

Mat annihilation_op(const HilbertLayout& layout) {
    const auto d = static_cast<Eigen::Index>(layout.dim());
    Mat a = Mat::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        const std::size_t n = layout.photons(static_cast<std::size_t>(i));
        if (n > 0) a(i - 1, i) = std::sqrt(static_cast<double>(n));
    }
    return a;
}

Mat lowering_op(const HilbertLayout& layout, std::size_t emitter) {
    if (emitter >= layout.n_emitters) {
        throw Error(ErrorKind::contract, kModule, "lowering_op", "emitter index out of range");
    }
    const auto d = static_cast<Eigen::Index>(layout.dim());
    const auto flip = static_cast<Eigen::Index>(
        (std::size_t{1} << (layout.n_emitters - 1 - emitter)) * layout.fock_dim());
    Mat s = Mat::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        if (layout.is_excited(static_cast<std::size_t>(i), emitter)) s(i - flip, i) = 1.0;
    }
    return s;
}

Mat pauli_z_op(const HilbertLayout& layout, std::size_t emitter) {
    const Mat s = lowering_op(layout, emitter);
    const Mat pe = s.adjoint() * s;
    return 2.0 * pe - Mat::Identity(pe.rows(), pe.cols());
}

Eigen::VectorXcd vectorize(const Mat& rho) {
    return Eigen::Map<const Eigen::VectorXcd>(rho.data(), rho.size());
}

Mat unvectorize(const Eigen::VectorXcd& vec, std::size_t dim) {
    const auto d = static_cast<Eigen::Index>(dim);
    if (vec.size() != d * d) {
        throw Error(ErrorKind::contract, kModule, "unvectorize", "vector length is not dim²");
    }
    return Eigen::Map<const Mat>(vec.data(), d, d);
}

Liouvillian build_liouvillian(const SystemModel& model, const HilbertLayout& layout,
                              const DriveParams& drive) {
    model.validate();
    check_layout(layout, "build_liouvillian");
    if (layout.n_emitters != model.emitters.size()) {
        throw Error(ErrorKind::contract, kModule, "build_liouvillian",
                    "layout has " + std::to_string(layout.n_emitters) + " emitters, model has " +
                        std::to_string(model.emitters.size()));
    }
    const auto& cav = model.cavity;
    const auto d = static_cast<Eigen::Index>(layout.dim());
    const Mat id = Mat::Identity(d, d);
    const Mat a = annihilation_op(layout);
    const Mat ad = a.adjoint();

    const double eps = std::sqrt(two_pi * cav.kappa_left) * drive.alpha_in;
    Mat h = -two_pi * (drive.omega_L - cav.omega_c) * (ad * a) + eps * (a + ad);

    std::vector<Mat> lowering;
    for (std::size_t k = 0; k < model.emitters.size(); ++k) {
        const auto& e = model.emitters[k];
        Mat s = lowering_op(layout, k);
        const Mat sd = s.adjoint();
        h += -two_pi * (drive.omega_L - e.omega_0) * (sd * s);
        h += two_pi * e.g * (s * ad + sd * a);
        lowering.push_back(std::move(s));
    }

    Liouvillian out{Mat::Zero(d * d, d * d), layout};
    const cd minus_i(0.0, -1.0);
    out.matrix += minus_i * (kron(id, h) - kron(h.transpose(), id));
    add_dissipator(out.matrix, a, two_pi * cav.kappa);
    for (std::size_t k = 0; k < model.emitters.size(); ++k) {
        const auto& e = model.emitters[k];
        add_dissipator(out.matrix, lowering[k], two_pi * e.gamma_prime);
        add_dissipator(out.matrix, pauli_z_op(layout, k), 0.5 * two_pi * e.gamma_star);
    }
    return out;
}

DensityState steady_state(const Liouvillian& liouvillian) {
    const std::size_t dim = liouvillian.layout.dim();
    const auto n = static_cast<Eigen::Index>(dim * dim);
    if (liouvillian.matrix.rows() != n || liouvillian.matrix.cols() != n) {
        throw Error(ErrorKind::contract, kModule, "steady_state",
                    "Liouvillian size does not match layout");
    }
    // Replace the first equation by the trace condition.
    Mat sys = liouvillian.matrix;
    sys.row(0).setZero();
    for (std::size_t i = 0; i < dim; ++i) sys(0, static_cast<Eigen::Index>(i + i * dim)) = 1.0;
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
    rhs[0] = 1.0;

    Eigen::FullPivLU<Mat> lu(sys);
    lu.setThreshold(1e-11);
    if (!lu.isInvertible()) {
        throw Error(ErrorKind::degenerate_kernel, kModule, "steady_state",
                    "Liouvillian kernel has dimension > 1 (rank " + std::to_string(lu.rank()) +
                        " of " + std::to_string(n) + ")");
    }
    const Eigen::VectorXcd x = lu.solve(rhs);
    if (!x.allFinite()) {
        throw Error(ErrorKind::numeric, kModule, "steady_state", "non-finite steady state");
    }
    Mat rho = unvectorize(x, dim);
    rho = 0.5 * (rho + rho.adjoint());
    return DensityState(std::move(rho), liouvillian.layout);
}

OracleResult transmission_oracle(const SystemModel& model, const HilbertLayout& layout,
                                 double omega_L, double alpha_in) {
    require(alpha_in > 0.0, kModule, "transmission_oracle", "alpha_in must be > 0");
    const auto lv = build_liouvillian(model, layout, DriveParams{alpha_in, omega_L});
    const DensityState rho = steady_state(lv);

    const Mat a = annihilation_op(layout);
    OracleResult r;
    r.field = rho.expect(a);
    r.photon_number = rho.expect(a.adjoint() * a).real();
    for (std::size_t k = 0; k < layout.n_emitters; ++k) {
        const Mat s = lowering_op(layout, k);
        r.max_excitation = std::max(r.max_excitation, rho.expect(s.adjoint() * s).real());
    }
    const cd t = std::sqrt(two_pi * model.cavity.kappa_right) * r.field / alpha_in;
    r.transmission = std::norm(t);
    return r;
}

ConvergenceTable convergence_check(const SystemModel& model, double omega_L, double alpha_in,
                                   std::span<const std::size_t> n_max_list, double rel_tol) {
    require(alpha_in > 0.0, kModule, "convergence_check", "alpha_in must be > 0");
    for (std::size_t i = 1; i < n_max_list.size(); ++i) {
        require(n_max_list[i] > n_max_list[i - 1], kModule, "convergence_check",
                "n_max_list must be increasing");
    }
    ConvergenceTable table;
    for (std::size_t n_max : n_max_list) {
        const HilbertLayout layout{model.emitters.size(), n_max};
        const auto r = transmission_oracle(model, layout, omega_L, alpha_in);
        if (!table.rows.empty() && !table.converged_at) {
            const double prev = table.rows.back().transmission;
            const double scale = std::max(std::abs(prev), std::abs(r.transmission));
            if (std::abs(r.transmission - prev) <= rel_tol * scale) table.converged_at = n_max;
        }
        table.rows.push_back({n_max, r.transmission, r.max_excitation});
    }
    return table;
}

} // namespace cqed
