#pragma once

#include <utility>
#include <vector>

#include "qmetro/fock.hpp"

namespace qmetro {

/// Sum and difference phases phi_s = phi1 + phi2, phi_d = phi1 - phi2.
struct PhasePair {
    double phi_s = 0.0;
    double phi_d = 0.0;

    static PhasePair from_arm_phases(double phi1, double phi2) {
        return PhasePair{phi1 + phi2, phi1 - phi2};
    }
    std::pair<double, double> arm_phases() const {
        return {(phi_s + phi_d) / 2.0, (phi_s - phi_d) / 2.0};
    }
};

/// Number-conserving two-mode unitary stored blockwise by total photon
/// number. blocks[n] is (n+1)x(n+1) and acts on span{|k, n-k>}, indexed by
/// k = photons in mode 1. Number conservation is structural: an operator in
/// this form cannot move amplitude between total-photon sectors.
struct TwoModeOperator {
    std::vector<Eigen::MatrixXcd> blocks;

    int dim_cap() const { return static_cast<int>(blocks.size()) - 1; }
};

// Angular-momentum blocks within the n-photon sector (j = n/2, m = k - j):
// Jx = (a1†a2 + a2†a1)/2, Jy = -i(a1†a2 - a2†a1)/2, Jz = (N1 - N2)/2.
Eigen::MatrixXd jx_block(int n);
Eigen::MatrixXcd jy_block(int n);
Eigen::VectorXd jz_diagonal(int n);

/// 50:50 beam splitter B = exp(-i J pi/4), J = a1†a2 + a2†a1 = 2 Jx,
/// built block-by-block from the eigendecomposition of the real symmetric
/// tridiagonal J. Satisfies B† a1 B = (a1 - i a2)/sqrt(2) and
/// B† a2 B = (a2 - i a1)/sqrt(2).
TwoModeOperator beam_splitter(int dim_cap);

/// Arm phase shifts exp(i(phi1 N1 + phi2 N2)): diagonal, the amplitude of
/// |n1, n2> picks up exp(i(n1+n2) phi_s/2 + i(n1-n2) phi_d/2).
TwoModeOperator phase_shift(const PhasePair& pair, int dim_cap);

/// Full Mach-Zehnder B† U B (second beam splitter taken as B†).
TwoModeOperator mach_zehnder(const PhasePair& pair, int dim_cap);

/// The same transformation built directly from its generators,
/// exp(i n phi_s/2) exp(i K phi_d/2) with K = 2 Jy; kept as an independent
/// construction so the two routes can be checked against each other.
TwoModeOperator mach_zehnder_from_generators(const PhasePair& pair, int dim_cap);

TwoModeOperator adjoint(const TwoModeOperator& op);
/// f ∘ g: apply g first.
TwoModeOperator compose(const TwoModeOperator& f, const TwoModeOperator& g);

/// Largest total photon number whose antidiagonal carries mass > mass_floor.
int max_occupied_total(const TwoModeState& state, double mass_floor = 0.0);

/// Blockwise application. The result lives on a square grid covering every
/// total-photon sector of the input, so application is exactly unitary when
/// the operator covers the state's support. Throws TruncationTooSmall if
/// mass above dim_cap exceeds support_tol.
TwoModeState apply(const TwoModeOperator& op, const TwoModeState& state,
                   double support_tol = 1e-12);

}  // namespace qmetro
