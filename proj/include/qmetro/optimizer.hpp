#pragma once

#include <cstdint>

#include "qmetro/fisher.hpp"
#include "qmetro/fock.hpp"

namespace qmetro {

/// Maximize f_dd = 2 alpha_sq var_p(chi) + <N> over secondary states chi
/// with <N> = nbar fixed.
struct OptimizationProblem {
    double alpha_sq = 0.0;
    double nbar = 0.0;
    int dim = 0;
    double tol = 1e-7;  // relative projected-gradient tolerance
    std::uint64_t seed = 0;
    int max_outer = 80;
    int max_inner = 20000;

    void validate() const;
};

struct OptimizationResult {
    ModeState chi_opt;
    double fdd_achieved = 0.0;
    double fmax_analytic = 0.0;
    double fidelity_to_squeezed = 0.0;
    long iterations = 0;
    bool converged = false;
    double constraint_residual = 0.0;  // <N> - nbar at exit
    double top_band_mass = 0.0;        // population of the top two levels
    int dim_used = 0;
};

/// Projected-gradient ascent with an augmented-Lagrangian photon-number
/// constraint and exact norm projection after every step. Retries at a
/// larger truncation if the solution leaks into the top band. Never throws
/// on non-convergence; the result carries converged = false instead.
OptimizationResult maximize_fdd_gradient(const OptimizationProblem& prob);

/// Lagrangian route: top eigenvector of p^2 - lambda N, with lambda chosen
/// by bisection so the eigenvector meets <N> = nbar. Valid only when the
/// resulting state has <p> = 0, which is verified on the result.
OptimizationResult maximize_fdd_eigensweep(const OptimizationProblem& prob);

struct RestartSummary {
    OptimizationResult best;
    std::vector<OptimizationResult> all;  // in restart index order
    double fdd_spread = 0.0;              // max - min of fdd_achieved
    int restarts = 0;
};

/// Runs independent seeded restarts of the gradient route (in parallel when
/// threads > 1; results are merged in fixed index order, so the outcome is
/// independent of the thread count).
RestartSummary maximize_fdd_gradient_restarts(const OptimizationProblem& prob,
                                              int restarts, int threads = 1);

}  // namespace qmetro
