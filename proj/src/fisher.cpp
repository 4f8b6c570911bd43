#include "qmetro/fisher.hpp"

#include <cmath>

namespace qmetro {

namespace {

// K psi on a grid padded by one level per mode; K moves a single photon, so
// the padded grid holds the exact result.
Eigen::MatrixXcd apply_k_padded(const Eigen::MatrixXcd& g) {
    const int d1 = static_cast<int>(g.rows());
    const int d2 = static_cast<int>(g.cols());
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(d1 + 1, d2 + 1);
    const Complex mi(0.0, -1.0);
    const Complex pi_(0.0, 1.0);
    for (int n1 = 0; n1 < d1; ++n1) {
        for (int n2 = 0; n2 < d2; ++n2) {
            const Complex amp = g(n1, n2);
            if (amp == Complex(0.0, 0.0)) continue;
            if (n2 > 0) {
                out(n1 + 1, n2 - 1) += mi * std::sqrt((n1 + 1.0) * n2) * amp;
            }
            if (n1 > 0) {
                out(n1 - 1, n2 + 1) += pi_ * std::sqrt(n1 * (n2 + 1.0)) * amp;
            }
        }
    }
    return out;
}

double mean_ns(const Eigen::MatrixXcd& g) {
    double acc = 0.0;
    for (int n1 = 0; n1 < g.rows(); ++n1)
        for (int n2 = 0; n2 < g.cols(); ++n2) acc += (n1 + n2) * std::norm(g(n1, n2));
    return acc;
}

double mean_ns2(const Eigen::MatrixXcd& g) {
    double acc = 0.0;
    for (int n1 = 0; n1 < g.rows(); ++n1)
        for (int n2 = 0; n2 < g.cols(); ++n2) {
            const double s = n1 + n2;
            acc += s * s * std::norm(g(n1, n2));
        }
    return acc;
}

}  // namespace

FisherMatrix qfi_from_derivatives(const TwoModeState& input, const PhasePair& pair) {
    const int cap = input.dim1() + input.dim2() - 2;
    const TwoModeState after_bs = apply(beam_splitter(cap), input);
    const TwoModeState psi = apply(phase_shift(pair, cap), after_bs);

    const int d = psi.dim1();
    Eigen::MatrixXcd gs(d, d), gd(d, d);
    for (int n1 = 0; n1 < d; ++n1) {
        for (int n2 = 0; n2 < d; ++n2) {
            gs(n1, n2) = 0.5 * (n1 + n2) * psi.amps(n1, n2);
            gd(n1, n2) = 0.5 * (n1 - n2) * psi.amps(n1, n2);
        }
    }
    const auto dot = [](const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
        return (a.conjugate().cwiseProduct(b)).sum();
    };
    const double ms = dot(psi.amps, gs).real();
    const double md = dot(psi.amps, gd).real();
    FisherMatrix fm;
    fm.f_ss = 4.0 * (dot(gs, gs).real() - ms * ms);
    fm.f_dd = 4.0 * (dot(gd, gd).real() - md * md);
    fm.f_sd = 4.0 * (dot(gs, gd).real() - ms * md);
    return fm;
}

FisherMatrix qfi_from_covariance(const TwoModeState& input) {
    const Eigen::MatrixXcd& g = input.amps;
    const Eigen::MatrixXcd kg = apply_k_padded(g);

    Eigen::MatrixXcd g_pad = Eigen::MatrixXcd::Zero(g.rows() + 1, g.cols() + 1);
    g_pad.topLeftCorner(g.rows(), g.cols()) = g;

    const double ns_mean = mean_ns(g);
    const double ns_var = mean_ns2(g) - ns_mean * ns_mean;

    const double k_mean = (g_pad.conjugate().cwiseProduct(kg)).sum().real();
    const double k2 = kg.squaredNorm();

    // <N_s K>: N_s is diagonal and commutes with K, so the product is real.
    Complex nsk(0.0, 0.0);
    for (int n1 = 0; n1 < g_pad.rows(); ++n1)
        for (int n2 = 0; n2 < g_pad.cols(); ++n2)
            nsk += std::conj(g_pad(n1, n2)) * double(n1 + n2) * kg(n1, n2);

    FisherMatrix fm;
    fm.f_ss = ns_var;
    fm.f_dd = k2 - k_mean * k_mean;
    fm.f_sd = nsk.real() - ns_mean * k_mean;
    return fm;
}

FisherMatrix qfi_product_analytic(Complex alpha, const ModeState& chi) {
    const Complex a = expect_a(chi);
    const Complex a2 = expect_a2(chi);
    const Complex na = expect_na(chi);
    const double n = expect_n(chi);
    const double n2 = expect_n2(chi);
    const double asq = std::norm(alpha);

    const double var_n = n2 - n * n;
    const Complex da2 = a2 - a * a;              // <(Δa)^2>
    const double dadaga = n - std::norm(a);      // <Δa† Δa>
    const Complex cov_na = na - n * a;           // <ΔN Δa>

    FisherMatrix fm;
    fm.f_ss = asq + var_n;
    fm.f_dd = asq * (2.0 * dadaga + 1.0) - 2.0 * (std::conj(alpha) * std::conj(alpha) * da2).real() + n;
    fm.f_sd = 2.0 * (std::conj(alpha) * a).imag() + 2.0 * (std::conj(alpha) * cov_na).imag();
    return fm;
}

Complex fsd_one_sided(Complex alpha, const ModeState& chi) {
    const Complex a = expect_a(chi);
    const Complex na = expect_na(chi);
    const double n = expect_n(chi);
    const Complex cov_na = na - n * a;
    const Complex i(0.0, 1.0);
    return 2.0 * (std::conj(alpha) * cov_na).imag() - i * std::conj(alpha) * a;
}

double fdd_quadrature(double alpha_sq, const ModeState& chi) {
    if (alpha_sq < 0.0) throw ValidationError("fdd_quadrature: alpha_sq must be >= 0");
    const Moments m = moments(chi);
    return 2.0 * alpha_sq * m.var_p + m.mean_photon;
}

FmaxReport fmax_bound(double alpha_sq, double nbar) {
    if (alpha_sq < 0.0 || nbar < 0.0) {
        throw ValidationError("fmax_bound: alpha_sq and nbar must be >= 0");
    }
    FmaxReport rep;
    const double root = std::sqrt(nbar * (nbar + 1.0));
    rep.f_max = alpha_sq * (2.0 * nbar + 2.0 * root + 1.0) + nbar;
    rep.remainder_r = nbar + alpha_sq * (2.0 * root - 2.0 * nbar + 1.0);
    rep.n_tot = alpha_sq + nbar;
    rep.heisenberg_term = rep.n_tot * rep.n_tot;
    rep.imbalance_term = (alpha_sq - nbar) * (alpha_sq - nbar);
    return rep;
}

QcrbReport qcrb_check(const FisherMatrix& fm, const Eigen::Matrix2d& sigma) {
    const double scale = std::max({std::abs(fm.f_ss), std::abs(fm.f_dd),
                                   std::abs(fm.f_sd), 1.0});
    const double det = fm.det();
    if (det <= 1e-12 * scale * scale) {
        throw SingularFisher("qcrb_check: Fisher matrix is singular (det " +
                             std::to_string(det) + ")");
    }
    Eigen::Matrix2d finv;
    finv << fm.f_dd, -fm.f_sd, -fm.f_sd, fm.f_ss;
    finv /= det;

    const Eigen::Matrix2d diff = sigma - finv;
    // Eigenvalues of a symmetric 2x2 in closed form.
    const double tr = diff.trace();
    const double dd = diff.determinant();
    const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - dd));
    QcrbReport rep;
    rep.min_eigenvalue = tr / 2.0 - disc;
    rep.trace_margin = sigma.trace() - finv.trace();
    rep.det_margin = sigma.determinant() - finv.determinant();
    const double tol = 1e-9 * std::max(1.0, finv.cwiseAbs().maxCoeff());
    rep.satisfied = rep.min_eigenvalue >= -tol;
    return rep;
}

}  // namespace qmetro
