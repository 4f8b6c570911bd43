#pragma once

#include "qmetro/fock.hpp"

namespace qmetro {

enum class Mode { One, Two };

/// Modal-entanglement diagnostics of a bipartite pure state.
struct EntanglementReport {
    double entropy = 0.0;                   // von Neumann, natural log
    std::vector<double> schmidt_spectrum;   // descending, sums to 1
    bool is_product = false;                // entropy < product_tol
};

inline constexpr double kProductTol = 1e-9;

/// Schmidt spectrum from the singular values of the amplitude grid (never
/// from a dense density matrix); entropy uses the 0 log 0 = 0 convention.
/// Both mode choices give the same spectrum.
EntanglementReport reduced_spectrum(const TwoModeState& state, Mode which_mode);

/// Splits chi into its mean amplitude beta = <chi|a|chi> and the zero-mean
/// remainder chi0 = D(-beta) chi.
struct OffsetDecomposition {
    Complex beta;
    ModeState chi0;
};
OffsetDecomposition coherent_offset_decomposition(const ModeState& chi);

/// Entanglement generated by the input beam splitter on coherent(alpha) ⊗
/// chi: the post-splitter entropy together with the cross moment
/// <a1†a2> - <a1†><a2>, which vanishes exactly on product outputs.
struct ProductCriterion {
    double entropy_after_bs = 0.0;
    Complex cross_moment;
};
ProductCriterion product_criterion(const ModeState& chi, Complex alpha);

/// Post-beam-splitter entropies of squeezed vacuum vs the number state at
/// the same mean photon number. The coherent drive does not enter: the
/// displacements act locally in the two arms, so the entropy is independent
/// of alpha (and of the mean amplitude of chi).
struct EntropyComparison {
    double entropy_squeezed = 0.0;
    double entropy_number = 0.0;
};
EntropyComparison entropy_comparison(int nbar, int dim);

}  // namespace qmetro
