#include "qmetro/counting.hpp"

#include <cmath>
#include <sstream>

#include "qmetro/io.hpp"

namespace qmetro {

namespace {

// J block (2 Jx) of the n-photon sector is real symmetric tridiagonal with
// off-diagonal sqrt((k+1)(n-k)); conjugating 2 Jy by T = diag(i^k) gives -J.
// All rotations below reduce to this one eigendecomposition:
//   exp(i Jy phi) = T W exp(-i phi Lambda / 2) W^T T†.
struct JEigen {
    Eigen::VectorXd eigs;
    Eigen::MatrixXd vecs;
};

JEigen decompose_j(int n) {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n + 1, n + 1);
    for (int k = 0; k < n; ++k) {
        const double c = std::sqrt((k + 1.0) * (n - k));
        j(k + 1, k) = c;
        j(k, k + 1) = c;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
    return {es.eigenvalues(), es.eigenvectors()};
}

Eigen::VectorXcd t_phases(int n) {
    Eigen::VectorXcd t(n + 1);
    for (int k = 0; k <= n; ++k) t[k] = std::polar(1.0, k * M_PI / 2.0);
    return t;
}

int require_two_j(double j) {
    const double two_j = 2.0 * j;
    const int n = static_cast<int>(std::lround(two_j));
    if (j < 0.0 || std::abs(two_j - n) > 1e-9) {
        throw ValidationError("wigner_d: j must be a nonnegative half-integer");
    }
    return n;
}

}  // namespace

WignerBlock wigner_d(double j, double theta) {
    const int n = require_two_j(j);
    const JEigen je = decompose_j(n);
    const Eigen::VectorXcd t = t_phases(n);
    Eigen::VectorXcd ph(n + 1);
    // exp(-i theta Jy) = T W exp(+i theta Lambda / 2) W^T T†
    for (int k = 0; k <= n; ++k) ph[k] = std::polar(1.0, theta / 2.0 * je.eigs[k]);
    const Eigen::MatrixXcd full = t.asDiagonal() *
                                  (je.vecs * ph.asDiagonal() * je.vecs.transpose()) *
                                  t.conjugate().asDiagonal();
    const double imag_residue = full.imag().cwiseAbs().maxCoeff();
    if (imag_residue > 1e-12) {
        throw NumericalError("wigner_d: imaginary residue " + std::to_string(imag_residue));
    }
    return WignerBlock{j, theta, full.real()};
}

Eigen::MatrixXd wigner_d_derivative(double j, double theta) {
    const int n = require_two_j(j);
    const JEigen je = decompose_j(n);
    const Eigen::VectorXcd t = t_phases(n);
    Eigen::VectorXcd ph(n + 1);
    for (int k = 0; k <= n; ++k) {
        ph[k] = Complex(0.0, je.eigs[k] / 2.0) * std::polar(1.0, theta / 2.0 * je.eigs[k]);
    }
    const Eigen::MatrixXcd full = t.asDiagonal() *
                                  (je.vecs * ph.asDiagonal() * je.vecs.transpose()) *
                                  t.conjugate().asDiagonal();
    return full.real();
}

double CountDistribution::total() const {
    double acc = 0.0;
    for (const auto& o : outcomes) acc += o.p;
    return acc;
}

RotationPlan make_rotation_plan(const TwoModeState& input, double mass_floor) {
    RotationPlan plan;
    const int nmax = input.dim1() + input.dim2() - 2;
    for (int n = 0; n <= nmax; ++n) {
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n + 1);
        const int k_lo = std::max(0, n - (input.dim2() - 1));
        const int k_hi = std::min(n, input.dim1() - 1);
        for (int k = k_lo; k <= k_hi; ++k) v[k] = input.amps(k, n - k);
        const double mass = v.squaredNorm();
        if (mass <= mass_floor) {
            plan.skipped_mass += mass;
            continue;
        }
        BlockRotationPlan b;
        b.n = n;
        JEigen je = decompose_j(n);
        b.eigs = std::move(je.eigs);
        b.vecs = std::move(je.vecs);
        const Eigen::VectorXcd t = t_phases(n);
        b.rotated = b.vecs.transpose() * (t.conjugate().asDiagonal() * v);
        b.mass = mass;
        plan.blocks.push_back(std::move(b));
    }
    return plan;
}

Eigen::VectorXcd RotationPlan::rotate(size_t b, double phi,
                                      Eigen::VectorXcd* deriv) const {
    const BlockRotationPlan& blk = blocks[b];
    const int n = blk.n;
    Eigen::VectorXcd scaled(n + 1);
    for (int k = 0; k <= n; ++k) {
        scaled[k] = std::polar(1.0, -phi / 2.0 * blk.eigs[k]) * blk.rotated[k];
    }
    const Eigen::VectorXcd t = t_phases(n);
    Eigen::VectorXcd out = t.asDiagonal() * (blk.vecs * scaled);
    if (deriv != nullptr) {
        Eigen::VectorXcd dscaled(n + 1);
        for (int k = 0; k <= n; ++k) {
            dscaled[k] = Complex(0.0, -blk.eigs[k] / 2.0) * scaled[k];
        }
        *deriv = t.asDiagonal() * (blk.vecs * dscaled);
    }
    return out;
}

CountDistribution count_distribution(const TwoModeState& input, double phi_d) {
    return count_distribution(make_rotation_plan(input), phi_d);
}

CountDistribution count_distribution(const RotationPlan& plan, double phi_d) {
    CountDistribution dist;
    dist.phi_d = phi_d;
    dist.tail_mass = plan.skipped_mass;
    size_t count = 0;
    for (const auto& b : plan.blocks) count += b.n + 1;
    dist.outcomes.reserve(count);
    for (size_t bi = 0; bi < plan.blocks.size(); ++bi) {
        const int n = plan.blocks[bi].n;
        const Eigen::VectorXcd out = plan.rotate(bi, phi_d);
        for (int k = 0; k <= n; ++k) {
            dist.outcomes.push_back({n, 2 * k - n, std::norm(out[k])});
        }
    }
    return dist;
}

double classical_fisher(const TwoModeState& input, double phi_d) {
    return classical_fisher(make_rotation_plan(input), phi_d);
}

double classical_fisher(const RotationPlan& plan, double phi_d) {
    double fi = 0.0;
    Eigen::VectorXcd deriv;
    for (size_t bi = 0; bi < plan.blocks.size(); ++bi) {
        const Eigen::VectorXcd amp = plan.rotate(bi, phi_d, &deriv);
        for (int k = 0; k < amp.size(); ++k) {
            const double p = std::norm(amp[k]);
            if (p >= kProbabilityFloor) {
                const double dp = 2.0 * (std::conj(amp[k]) * deriv[k]).real();
                fi += dp * dp / p;
            } else {
                fi += 4.0 * std::norm(deriv[k]);
            }
        }
    }
    return fi;
}

double classical_fisher_nd_only(const TwoModeState& input, double phi_d) {
    return classical_fisher_nd_only(make_rotation_plan(input), phi_d);
}

double classical_fisher_nd_only(const RotationPlan& plan, double phi_d) {
    int nd_max = 0;
    for (const auto& b : plan.blocks) nd_max = std::max(nd_max, b.n);
    const int width = 2 * nd_max + 1;
    Eigen::VectorXd q = Eigen::VectorXd::Zero(width);
    Eigen::VectorXd dq = Eigen::VectorXd::Zero(width);
    Eigen::VectorXd limit4 = Eigen::VectorXd::Zero(width);  // 4 sum |A'|^2
    Eigen::VectorXcd deriv;
    for (size_t bi = 0; bi < plan.blocks.size(); ++bi) {
        const int n = plan.blocks[bi].n;
        const Eigen::VectorXcd amp = plan.rotate(bi, phi_d, &deriv);
        for (int k = 0; k <= n; ++k) {
            const int idx = (2 * k - n) + nd_max;
            q[idx] += std::norm(amp[k]);
            dq[idx] += 2.0 * (std::conj(amp[k]) * deriv[k]).real();
            limit4[idx] += 4.0 * std::norm(deriv[k]);
        }
    }
    double fi = 0.0;
    for (int idx = 0; idx < width; ++idx) {
        if (q[idx] >= kProbabilityFloor) {
            fi += dq[idx] * dq[idx] / q[idx];
        } else {
            fi += limit4[idx];
        }
    }
    return fi;
}

std::string count_distribution_csv(const CountDistribution& dist) {
    std::ostringstream os;
    os << "n_s,n_d,probability\n";
    for (const auto& o : dist.outcomes) {
        os << o.ns << "," << o.nd << "," << format_g17(o.p) << "\n";
    }
    return os.str();
}

std::string count_distribution_json(const CountDistribution& dist) {
    std::ostringstream os;
    os << "{\n  \"phi_d\": " << format_g17(dist.phi_d)
       << ",\n  \"tail_mass\": " << format_g17(dist.tail_mass)
       << ",\n  \"outcomes\": [";
    for (size_t i = 0; i < dist.outcomes.size(); ++i) {
        const auto& o = dist.outcomes[i];
        os << (i == 0 ? "\n" : ",\n") << "    {\"n_s\": " << o.ns
           << ", \"n_d\": " << o.nd << ", \"probability\": " << format_g17(o.p) << "}";
    }
    os << "\n  ]\n}\n";
    return os.str();
}

}  // namespace qmetro
