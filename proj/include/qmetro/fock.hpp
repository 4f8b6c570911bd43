#pragma once

#include <Eigen/Dense>
#include <complex>

#include "qmetro/errors.hpp"

namespace qmetro {

using Complex = std::complex<double>;

/// Truncated Fock-basis size and the tolerated tail mass.
///
/// tail_tol sets the accuracy scale of a truncation: constructors reject a
/// basis whose top-two-level occupancy or whose probability loss above
/// level dim-1 exceeds 10 * tail_tol.
struct TruncationPolicy {
    int dim = 0;
    double tail_tol = 1e-10;

    /// Poisson-calibrated default: dim = ceil(mu + 8 sqrt(mu) + 20).
    static TruncationPolicy for_mean_photon(double mu, double tail_tol = 1e-10);
    /// Squeezed-vacuum sizing: even-level weights decay geometrically with
    /// ratio tanh^2 r, so the Poisson rule badly underestimates the tail.
    static TruncationPolicy for_squeezed(double r, double tail_tol = 1e-10);

    void validate() const;
};

/// Pure state of one bosonic mode; amps[n] is the amplitude of Fock level n.
/// Unit norm within 1e-12 after construction.
struct ModeState {
    Eigen::VectorXcd amps;

    int dim() const { return static_cast<int>(amps.size()); }
};

/// Pure state of two modes; amps(n1, n2) is the amplitude of |n1, n2>.
struct TwoModeState {
    Eigen::MatrixXcd amps;

    int dim1() const { return static_cast<int>(amps.rows()); }
    int dim2() const { return static_cast<int>(amps.cols()); }
};

/// Single-mode operator as a dense Fock-basis matrix.
struct ModeOperator {
    Eigen::MatrixXcd mat;
};

/// First and second moments of one mode.
///
/// Quadrature convention: a = (x + ip)/sqrt(2), so x = (a + a†)/sqrt(2),
/// p = i(a† - a)/sqrt(2), [x, p] = i, and the vacuum has
/// var_x = var_p = 1/2. All moments below use this convention.
struct Moments {
    double mean_photon = 0.0;
    double mean_x = 0.0;
    double mean_p = 0.0;
    double var_x = 0.0;
    double var_p = 0.0;
    double var_n = 0.0;
};

/// Coherent state D(alpha)|0>. Poisson weights are evaluated in log space,
/// so any |alpha|^2 that fits the truncation is representable.
ModeState make_coherent(Complex alpha, const TruncationPolicy& policy);

/// Squeezed vacuum exp(r(a^2 - a†^2)/2)|0>, mean photon number sinh^2 r.
/// Only even levels are populated; for r > 0 the x quadrature is squeezed
/// (var_x = e^{-2r}/2) and p is anti-squeezed (var_p = e^{2r}/2).
ModeState make_squeezed_vacuum(double r, const TruncationPolicy& policy);

/// Number state |n>.
ModeState make_number(int n, const TruncationPolicy& policy);

/// Displacement exp(beta a† - beta* a) applied by exact exponentiation of
/// the truncated generator. Throws TruncationTooSmall if the displaced
/// state leaks into the top level beyond tail_guard.
ModeState displace(const ModeState& state, Complex beta, double tail_guard = 1e-8);

/// Product state s1 ⊗ s2.
TwoModeState tensor(const ModeState& s1, const ModeState& s2);

Moments moments(const ModeState& state);

// Exact Fock-basis ladder expectations (shift sums, no matrices).
std::complex<double> expect_a(const ModeState& state);    // <a>
std::complex<double> expect_a2(const ModeState& state);   // <a^2>
std::complex<double> expect_na(const ModeState& state);   // <N a>
double expect_n(const ModeState& state);                  // <N>
double expect_n2(const ModeState& state);                 // <N^2>

/// <s1|s2>; states of different dim are compared on the common levels
/// (the longer tail is treated as zero-padded).
Complex inner(const ModeState& s1, const ModeState& s2);
double fidelity(const ModeState& s1, const ModeState& s2);  // |<s1|s2>|^2

double norm(const TwoModeState& state);
Complex inner(const TwoModeState& s1, const TwoModeState& s2);

/// Multiply by the global phase that makes the first amplitude with
/// |amp| > threshold real positive.
void fix_global_phase_first(Eigen::VectorXcd& amps, double threshold = 1e-14);
/// Same, anchored at the largest-magnitude amplitude (optimizer gauge).
void fix_global_phase_largest(Eigen::VectorXcd& amps);

/// Wrap an amplitude vector as a unit-norm ModeState.
ModeState normalized_state(Eigen::VectorXcd amps);

// Dense single-mode operator matrices on the truncated basis.
Eigen::MatrixXcd annihilation_matrix(int dim);
Eigen::MatrixXcd number_matrix(int dim);
Eigen::MatrixXcd position_matrix(int dim);   // x
Eigen::MatrixXcd momentum_matrix(int dim);   // p
/// Exact matrix elements <m|p^2|n> (not the square of the truncated p).
Eigen::MatrixXd momentum_squared_matrix(int dim);

/// exp(A) for anti-Hermitian A, via eigendecomposition of -iA.
Eigen::MatrixXcd exp_antihermitian(const Eigen::MatrixXcd& a);

// Two-mode ladder actions on an amplitude grid (same-shape results; the
// lowering direction never leaves the grid).
Eigen::MatrixXcd apply_a1(const Eigen::MatrixXcd& grid);
Eigen::MatrixXcd apply_a2(const Eigen::MatrixXcd& grid);

// Two-mode expectations used by the entanglement and interferometer checks.
Complex expect_a1(const TwoModeState& state);
Complex expect_a2_mode(const TwoModeState& state);
Complex expect_a1dag_a2(const TwoModeState& state);

}  // namespace qmetro
