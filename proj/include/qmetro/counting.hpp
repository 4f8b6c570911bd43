#pragma once

#include <vector>

#include "qmetro/fock.hpp"

namespace qmetro {

/// Real orthogonal Wigner rotation matrix within a fixed total angular
/// momentum j: mat(m + j, m' + j) = <j,m|exp(-i theta Jy)|j,m'>, rows and
/// columns indexed by m ascending from -j.
struct WignerBlock {
    double j = 0.0;
    double theta = 0.0;
    Eigen::MatrixXd mat;
};

WignerBlock wigner_d(double j, double theta);
/// Analytic d(theta)/d(theta), from the same Jy eigendecomposition.
Eigen::MatrixXd wigner_d_derivative(double j, double theta);

/// Joint photon-count distribution at the interferometer output. Outcomes
/// are (n_s, n_d) with n_d in {-n_s, -n_s+2, ..., n_s}; the parity
/// constraint n_s + n_d even is structural. Entries are stored sorted by
/// (n_s, n_d) ascending; this ordering is the sampling contract.
struct CountDistribution {
    struct Outcome {
        int ns = 0;
        int nd = 0;
        double p = 0.0;
    };
    double phi_d = 0.0;
    std::vector<Outcome> outcomes;
    /// Input mass skipped because a whole total-photon block was below the
    /// block floor; reported separately from the in-table probabilities.
    double tail_mass = 0.0;

    double total() const;
};

/// Rotation data for one total-photon sector of a fixed input state:
/// the Jy eigensystem in its real tridiagonal form plus the input block
/// already rotated into the eigenbasis. Amplitudes after exp(i Jy phi)
/// are then a diagonal phase multiply per angle.
struct BlockRotationPlan {
    int n = 0;                 // total photons = 2j
    Eigen::VectorXd eigs;      // eigenvalues of the J block (2 Jy has -these)
    Eigen::MatrixXd vecs;
    Eigen::VectorXcd rotated;  // W^T T† v
    double mass = 0.0;
};

struct RotationPlan {
    std::vector<BlockRotationPlan> blocks;
    double skipped_mass = 0.0;

    /// Output amplitudes <j,m|exp(i Jy phi)|psi> for block index b,
    /// ordered by m ascending (k = m + j). If deriv is non-null it receives
    /// the analytic d/dphi of the same amplitudes.
    Eigen::VectorXcd rotate(size_t b, double phi,
                            Eigen::VectorXcd* deriv = nullptr) const;
};

/// Blocks below mass_floor are dropped and their mass accumulated into
/// skipped_mass.
RotationPlan make_rotation_plan(const TwoModeState& input,
                                double mass_floor = 1e-30);

CountDistribution count_distribution(const TwoModeState& input, double phi_d);
CountDistribution count_distribution(const RotationPlan& plan, double phi_d);

/// Classical Fisher information of the joint (n_s, n_d) counts,
/// F(phi) = sum (dP/dphi)^2 / P. Outcomes with P below p_floor are handled
/// by the amplitude limit: P = |A|^2 -> term 4|A'|^2 as A -> 0.
double classical_fisher(const TwoModeState& input, double phi_d);
double classical_fisher(const RotationPlan& plan, double phi_d);

/// Fisher information of the n_d marginal alone; by convexity never above
/// the joint-count value.
double classical_fisher_nd_only(const TwoModeState& input, double phi_d);
double classical_fisher_nd_only(const RotationPlan& plan, double phi_d);

/// Probability floor below which the amplitude limit rule replaces the
/// (dP)^2 / P quotient.
inline constexpr double kProbabilityFloor = 1e-14;

std::string count_distribution_csv(const CountDistribution& dist);
std::string count_distribution_json(const CountDistribution& dist);

}  // namespace qmetro
