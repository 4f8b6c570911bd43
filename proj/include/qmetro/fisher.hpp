#pragma once

#include "qmetro/fock.hpp"
#include "qmetro/interferometer.hpp"

namespace qmetro {

/// Real symmetric 2x2 Fisher information matrix for the (phi_s, phi_d)
/// phase pair, in units of 1/rad^2 per trial.
struct FisherMatrix {
    double f_ss = 0.0;
    double f_sd = 0.0;
    double f_dd = 0.0;

    double det() const { return f_ss * f_dd - f_sd * f_sd; }
};

/// Decomposition of the optimal-secondary-state Fisher information:
/// f_max = 4 alpha^2 nbar + R = n_tot^2 - (alpha^2 - nbar)^2 + R, with
/// n_tot <= R <= n_tot + alpha^2.
struct FmaxReport {
    double f_max = 0.0;
    double remainder_r = 0.0;
    double n_tot = 0.0;
    double heisenberg_term = 0.0;  // n_tot^2
    double imbalance_term = 0.0;   // (alpha^2 - nbar)^2
};

struct QcrbReport {
    bool satisfied = false;
    double min_eigenvalue = 0.0;  // smallest eigenvalue of Sigma - F^{-1}
    double trace_margin = 0.0;    // tr(Sigma) - tr(F^{-1})
    double det_margin = 0.0;      // det(Sigma) - det(F^{-1})
};

/// Pure-state QFI matrix from derivative states of |psi> = U B |input>.
/// The phase generators are known (N_s/2 and N_d/2 act diagonally on the
/// output state), so the derivatives are applied exactly; the result is
/// independent of the phase values themselves.
FisherMatrix qfi_from_derivatives(const TwoModeState& input, const PhasePair& pair);

/// QFI matrix as the covariance matrix of N_s and K = -i(a1†a2 - a2†a1) on
/// the state before the beam splitter. K is applied on a grid padded by one
/// level in each mode, so no truncation error enters.
FisherMatrix qfi_from_covariance(const TwoModeState& input);

/// Closed-form QFI for the product input coherent(alpha) ⊗ chi, written in
/// central moments of the secondary mode:
///   f_ss = |alpha|^2 + var(N2)
///   f_dd = |alpha|^2 (2<Δa†Δa> + 1) - 2 Re(alpha*^2 <(Δa)^2>) + <N2>
///   f_sd = 2 Im(alpha* <a2>) + 2 Im(alpha* <ΔN2 Δa2>)
/// The f_sd expression is the Hermitian-symmetric form fixed against the
/// covariance route; see tests for the check against the one-sided variant.
FisherMatrix qfi_product_analytic(Complex alpha, const ModeState& chi);

/// One-sided variant of the cross entry that keeps only the displacement
/// term -i alpha* <a2> without its conjugate; generally complex. Retained
/// so tests can flag its discrepancy from the symmetric form.
Complex fsd_one_sided(Complex alpha, const ModeState& chi);

/// Quadrature form of the difference-phase QFI for real coherent amplitude:
/// 2 alpha^2 var_p(chi) + <N2>.
double fdd_quadrature(double alpha_sq, const ModeState& chi);

/// Analytic maximum of f_dd over secondary states with <N2> = nbar:
/// alpha^2 (2 nbar + 2 sqrt(nbar(nbar+1)) + 1) + nbar, attained by squeezed
/// vacuum with sinh^2 r = nbar.
FmaxReport fmax_bound(double alpha_sq, double nbar);

/// Checks the matrix bound Sigma >= F^{-1} together with the trace and
/// determinant corollaries. Throws SingularFisher when det(F) is below
/// 1e-12 times the squared entry scale.
QcrbReport qcrb_check(const FisherMatrix& fm, const Eigen::Matrix2d& sigma);

}  // namespace qmetro
