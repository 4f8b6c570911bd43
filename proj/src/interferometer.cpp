#include "qmetro/interferometer.hpp"

#include <cmath>

namespace qmetro {

namespace {

// Eigendecomposition of the n-photon block of J = 2 Jx (real symmetric
// tridiagonal, off-diagonal sqrt((k+1)(n-k))). One decomposition serves the
// beam splitter, the K rotation, and the Wigner matrices:
//   B_n          = W e^{-i pi Lambda / 4} W^T
//   e^{i K phi/2} = T W e^{-i phi Lambda / 2} W^T T†,  T = diag(i^k),
// because T† K T = -J.
struct JBlockEigen {
    Eigen::VectorXd eigs;
    Eigen::MatrixXd vecs;
};

JBlockEigen decompose_j_block(int n) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jx_block(n) * 2.0);
    return {es.eigenvalues(), es.eigenvectors()};
}

Eigen::VectorXcd quarter_phases(int n) {
    // T diagonal, T_kk = i^k.
    Eigen::VectorXcd t(n + 1);
    for (int k = 0; k <= n; ++k) t[k] = std::polar(1.0, k * M_PI / 2.0);
    return t;
}

}  // namespace

Eigen::MatrixXd jx_block(int n) {
    Eigen::MatrixXd jx = Eigen::MatrixXd::Zero(n + 1, n + 1);
    for (int k = 0; k < n; ++k) {
        const double c = 0.5 * std::sqrt((k + 1.0) * (n - k));
        jx(k + 1, k) = c;
        jx(k, k + 1) = c;
    }
    return jx;
}

Eigen::MatrixXcd jy_block(int n) {
    Eigen::MatrixXcd jy = Eigen::MatrixXcd::Zero(n + 1, n + 1);
    for (int k = 0; k < n; ++k) {
        const double c = 0.5 * std::sqrt((k + 1.0) * (n - k));
        jy(k + 1, k) = Complex(0.0, -c);
        jy(k, k + 1) = Complex(0.0, c);
    }
    return jy;
}

Eigen::VectorXd jz_diagonal(int n) {
    Eigen::VectorXd jz(n + 1);
    for (int k = 0; k <= n; ++k) jz[k] = k - n / 2.0;
    return jz;
}

TwoModeOperator beam_splitter(int dim_cap) {
    if (dim_cap < 0) throw ValidationError("beam_splitter: dim_cap must be >= 0");
    TwoModeOperator op;
    op.blocks.reserve(dim_cap + 1);
    for (int n = 0; n <= dim_cap; ++n) {
        const JBlockEigen je = decompose_j_block(n);
        Eigen::VectorXcd ph(n + 1);
        for (int k = 0; k <= n; ++k) ph[k] = std::polar(1.0, -M_PI / 4.0 * je.eigs[k]);
        op.blocks.push_back(je.vecs * ph.asDiagonal() * je.vecs.transpose());
    }
    return op;
}

TwoModeOperator phase_shift(const PhasePair& pair, int dim_cap) {
    TwoModeOperator op;
    op.blocks.reserve(dim_cap + 1);
    for (int n = 0; n <= dim_cap; ++n) {
        Eigen::VectorXcd d(n + 1);
        for (int k = 0; k <= n; ++k) {
            // n1 = k, n2 = n - k
            d[k] = std::polar(1.0, n * pair.phi_s / 2.0 + (2.0 * k - n) * pair.phi_d / 2.0);
        }
        op.blocks.push_back(Eigen::MatrixXcd(d.asDiagonal()));
    }
    return op;
}

TwoModeOperator mach_zehnder(const PhasePair& pair, int dim_cap) {
    const TwoModeOperator b = beam_splitter(dim_cap);
    return compose(adjoint(b), compose(phase_shift(pair, dim_cap), b));
}

TwoModeOperator mach_zehnder_from_generators(const PhasePair& pair, int dim_cap) {
    TwoModeOperator op;
    op.blocks.reserve(dim_cap + 1);
    for (int n = 0; n <= dim_cap; ++n) {
        const JBlockEigen je = decompose_j_block(n);
        const Eigen::VectorXcd t = quarter_phases(n);
        Eigen::VectorXcd ph(n + 1);
        for (int k = 0; k <= n; ++k) ph[k] = std::polar(1.0, -pair.phi_d / 2.0 * je.eigs[k]);
        Eigen::MatrixXcd block = t.asDiagonal() *
                                 (je.vecs * ph.asDiagonal() * je.vecs.transpose()) *
                                 t.conjugate().asDiagonal();
        block *= std::polar(1.0, n * pair.phi_s / 2.0);
        op.blocks.push_back(std::move(block));
    }
    return op;
}

TwoModeOperator adjoint(const TwoModeOperator& op) {
    TwoModeOperator out;
    out.blocks.reserve(op.blocks.size());
    for (const auto& b : op.blocks) out.blocks.push_back(b.adjoint());
    return out;
}

TwoModeOperator compose(const TwoModeOperator& f, const TwoModeOperator& g) {
    const size_t n = std::min(f.blocks.size(), g.blocks.size());
    TwoModeOperator out;
    out.blocks.reserve(n);
    for (size_t k = 0; k < n; ++k) out.blocks.push_back(f.blocks[k] * g.blocks[k]);
    return out;
}

int max_occupied_total(const TwoModeState& state, double mass_floor) {
    const int nmax = state.dim1() + state.dim2() - 2;
    for (int n = nmax; n >= 0; --n) {
        double mass = 0.0;
        const int k_lo = std::max(0, n - (state.dim2() - 1));
        const int k_hi = std::min(n, state.dim1() - 1);
        for (int k = k_lo; k <= k_hi; ++k) mass += std::norm(state.amps(k, n - k));
        if (mass > mass_floor) return n;
    }
    return 0;
}

TwoModeState apply(const TwoModeOperator& op, const TwoModeState& state,
                   double support_tol) {
    const int nmax = state.dim1() + state.dim2() - 2;
    const int cap = op.dim_cap();
    if (nmax > cap) {
        double above = 0.0;
        for (int n = cap + 1; n <= nmax; ++n) {
            const int k_lo = std::max(0, n - (state.dim2() - 1));
            const int k_hi = std::min(n, state.dim1() - 1);
            for (int k = k_lo; k <= k_hi; ++k) above += std::norm(state.amps(k, n - k));
        }
        if (above > support_tol) {
            throw TruncationTooSmall("apply: state carries mass " +
                                     std::to_string(above) +
                                     " above operator dim_cap " + std::to_string(cap));
        }
    }
    const int top = std::min(nmax, cap);
    const int out_dim = top + 1;
    TwoModeState out;
    out.amps = Eigen::MatrixXcd::Zero(out_dim, out_dim);
    Eigen::VectorXcd v, w;
    for (int n = 0; n <= top; ++n) {
        v.setZero(n + 1);
        const int k_lo = std::max(0, n - (state.dim2() - 1));
        const int k_hi = std::min(n, state.dim1() - 1);
        for (int k = k_lo; k <= k_hi; ++k) v[k] = state.amps(k, n - k);
        w = op.blocks[n] * v;
        for (int k = 0; k <= n; ++k) out.amps(k, n - k) = w[k];
    }
    return out;
}

}  // namespace qmetro
