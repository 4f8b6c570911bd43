#include "qmetro/entanglement.hpp"

#include <cmath>

#include "qmetro/interferometer.hpp"

namespace qmetro {

EntanglementReport reduced_spectrum(const TwoModeState& state, Mode which_mode) {
    (void)which_mode;  // Schmidt symmetry: both reductions share the spectrum
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(state.amps);
    const Eigen::VectorXd& sv = svd.singularValues();
    EntanglementReport rep;
    rep.schmidt_spectrum.reserve(sv.size());
    double entropy = 0.0;
    for (int i = 0; i < sv.size(); ++i) {
        const double lam = sv[i] * sv[i];
        rep.schmidt_spectrum.push_back(lam);
        if (lam > 0.0) entropy -= lam * std::log(lam);
    }
    rep.entropy = entropy;
    rep.is_product = entropy < kProductTol;
    return rep;
}

OffsetDecomposition coherent_offset_decomposition(const ModeState& chi) {
    const Complex beta = expect_a(chi);
    return {beta, displace(chi, -beta)};
}

ProductCriterion product_criterion(const ModeState& chi, Complex alpha) {
    const TruncationPolicy pol = TruncationPolicy::for_mean_photon(std::norm(alpha));
    const ModeState primary = make_coherent(alpha, pol);
    const TwoModeState in = tensor(primary, chi);
    const int cap = in.dim1() + in.dim2() - 2;
    const TwoModeState out = apply(beam_splitter(cap), in);

    ProductCriterion crit;
    crit.entropy_after_bs = reduced_spectrum(out, Mode::One).entropy;
    crit.cross_moment = expect_a1dag_a2(out) - std::conj(expect_a1(out)) * expect_a2_mode(out);
    return crit;
}

EntropyComparison entropy_comparison(int nbar, int dim) {
    if (nbar < 0) throw ValidationError("entropy_comparison: nbar must be >= 0");
    const TruncationPolicy pol{dim, 1e-9};
    const ModeState squeezed = make_squeezed_vacuum(std::asinh(std::sqrt(double(nbar))), pol);
    const ModeState number = make_number(nbar, pol);
    EntropyComparison cmp;
    cmp.entropy_squeezed = product_criterion(squeezed, 0.0).entropy_after_bs;
    cmp.entropy_number = product_criterion(number, 0.0).entropy_after_bs;
    return cmp;
}

}  // namespace qmetro
