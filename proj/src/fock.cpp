#include "qmetro/fock.hpp"

#include <algorithm>
#include <cmath>

namespace qmetro {

namespace {

constexpr double kNormTol = 1e-12;

void check_tail(const Eigen::VectorXcd& raw, const TruncationPolicy& policy,
                const char* what) {
    const double mass = raw.squaredNorm();
    // Band of the last two levels, so parity-gapped states are judged by
    // their highest populated level.
    double band = std::norm(raw[raw.size() - 1]);
    if (raw.size() >= 2) band += std::norm(raw[raw.size() - 2]);
    if (1.0 - mass > 10.0 * policy.tail_tol || band > 10.0 * policy.tail_tol) {
        char msg[160];
        std::snprintf(msg, sizeof(msg),
                      "%s: dim %d leaves tail mass %.3e, top-band mass %.3e", what,
                      policy.dim, 1.0 - mass, band);
        throw TruncationTooSmall(msg);
    }
}

}  // namespace

TruncationPolicy TruncationPolicy::for_mean_photon(double mu, double tail_tol) {
    if (mu < 0.0) throw ValidationError("mean photon number must be >= 0");
    TruncationPolicy p;
    p.dim = std::max(2, static_cast<int>(std::ceil(mu + 8.0 * std::sqrt(mu) + 20.0)));
    p.tail_tol = tail_tol;
    return p;
}

TruncationPolicy TruncationPolicy::for_squeezed(double r, double tail_tol) {
    TruncationPolicy p;
    p.tail_tol = tail_tol;
    const double t = std::tanh(std::abs(r)) * std::tanh(std::abs(r));
    if (t < 1e-12) {
        p.dim = 16;
        return p;
    }
    // Walk the even-level weights P(2m); stop once the geometric bound on the
    // remaining mass drops below tail_tol / 10.
    double w = 1.0 / std::cosh(std::abs(r));  // P(0)
    int m = 0;
    while (w / (1.0 - t) > 0.1 * tail_tol && m < 100000) {
        ++m;
        w *= t * (2.0 * m - 1.0) / (2.0 * m);
    }
    p.dim = 2 * m + 10;
    return p;
}

void TruncationPolicy::validate() const {
    if (dim < 2) throw ValidationError("truncation dim must be >= 2");
    if (tail_tol < 0.0) throw ValidationError("tail_tol must be >= 0");
}

ModeState make_coherent(Complex alpha, const TruncationPolicy& policy) {
    policy.validate();
    Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(policy.dim);
    if (std::abs(alpha) == 0.0) {
        amps[0] = 1.0;
        return ModeState{amps};
    }
    const double log_mag = std::log(std::abs(alpha));
    const double phase = std::arg(alpha);
    const double nsq = std::norm(alpha);
    for (int n = 0; n < policy.dim; ++n) {
        const double log_amp = -0.5 * nsq + n * log_mag - 0.5 * std::lgamma(n + 1.0);
        amps[n] = std::exp(log_amp) * std::polar(1.0, n * phase);
    }
    check_tail(amps, policy, "make_coherent");
    amps /= amps.norm();
    fix_global_phase_first(amps);
    return ModeState{amps};
}

ModeState make_squeezed_vacuum(double r, const TruncationPolicy& policy) {
    policy.validate();
    Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(policy.dim);
    if (r == 0.0) {
        amps[0] = 1.0;
        return ModeState{amps};
    }
    // c_{2k} = (-tanh r)^k sqrt((2k)!) / (2^k k! sqrt(cosh r)), in log space.
    const double log_tanh = std::log(std::abs(std::tanh(r)));
    const double sign_tanh = r > 0.0 ? -1.0 : 1.0;
    const double log_cosh = std::log(std::cosh(r));
    double sign = 1.0;
    for (int k = 0; 2 * k < policy.dim; ++k) {
        const double log_amp = -0.5 * log_cosh + k * (log_tanh - std::log(2.0)) +
                               0.5 * std::lgamma(2.0 * k + 1.0) - std::lgamma(k + 1.0);
        amps[2 * k] = sign * std::exp(log_amp);
        sign *= sign_tanh;
    }
    check_tail(amps, policy, "make_squeezed_vacuum");
    amps /= amps.norm();
    fix_global_phase_first(amps);
    return ModeState{amps};
}

ModeState make_number(int n, const TruncationPolicy& policy) {
    policy.validate();
    if (n < 0 || n >= policy.dim) {
        throw IndexOutOfRange("make_number: level " + std::to_string(n) +
                              " outside basis of dim " + std::to_string(policy.dim));
    }
    Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(policy.dim);
    amps[n] = 1.0;
    return ModeState{amps};
}

ModeState displace(const ModeState& state, Complex beta, double tail_guard) {
    const int dim = state.dim();
    Eigen::MatrixXcd gen = Eigen::MatrixXcd::Zero(dim, dim);
    for (int n = 0; n + 1 < dim; ++n) {
        const double s = std::sqrt(n + 1.0);
        gen(n + 1, n) = beta * s;           // beta a†
        gen(n, n + 1) = -std::conj(beta) * s;  // -beta* a
    }
    Eigen::VectorXcd out = exp_antihermitian(gen) * state.amps;
    const double top = std::norm(out[dim - 1]);
    if (top > tail_guard) {
        throw TruncationTooSmall("displace: displaced state has top-level mass " +
                                 std::to_string(top));
    }
    out /= out.norm();
    return ModeState{out};
}

TwoModeState tensor(const ModeState& s1, const ModeState& s2) {
    TwoModeState out;
    out.amps = s1.amps * s2.amps.transpose();
    return out;
}

std::complex<double> expect_a(const ModeState& state) {
    Complex acc = 0.0;
    for (int n = 0; n + 1 < state.dim(); ++n) {
        acc += std::conj(state.amps[n]) * state.amps[n + 1] * std::sqrt(n + 1.0);
    }
    return acc;
}

std::complex<double> expect_a2(const ModeState& state) {
    Complex acc = 0.0;
    for (int n = 0; n + 2 < state.dim(); ++n) {
        acc += std::conj(state.amps[n]) * state.amps[n + 2] *
               std::sqrt((n + 1.0) * (n + 2.0));
    }
    return acc;
}

std::complex<double> expect_na(const ModeState& state) {
    Complex acc = 0.0;
    for (int n = 0; n + 1 < state.dim(); ++n) {
        acc += std::conj(state.amps[n]) * state.amps[n + 1] * double(n) *
               std::sqrt(n + 1.0);
    }
    return acc;
}

double expect_n(const ModeState& state) {
    double acc = 0.0;
    for (int n = 0; n < state.dim(); ++n) acc += n * std::norm(state.amps[n]);
    return acc;
}

double expect_n2(const ModeState& state) {
    double acc = 0.0;
    for (int n = 0; n < state.dim(); ++n) {
        acc += double(n) * double(n) * std::norm(state.amps[n]);
    }
    return acc;
}

Moments moments(const ModeState& state) {
    Moments m;
    const Complex a = expect_a(state);
    const Complex a2 = expect_a2(state);
    const double n = expect_n(state);
    const double n2 = expect_n2(state);
    m.mean_photon = n;
    m.mean_x = std::sqrt(2.0) * a.real();
    m.mean_p = std::sqrt(2.0) * a.imag();
    const double x2 = n + 0.5 + a2.real();
    const double p2 = n + 0.5 - a2.real();
    m.var_x = x2 - m.mean_x * m.mean_x;
    m.var_p = p2 - m.mean_p * m.mean_p;
    m.var_n = n2 - n * n;
    return m;
}

Complex inner(const ModeState& s1, const ModeState& s2) {
    const int d = std::min(s1.dim(), s2.dim());
    return s1.amps.head(d).dot(s2.amps.head(d));  // dot conjugates the left side
}

double fidelity(const ModeState& s1, const ModeState& s2) {
    return std::norm(inner(s1, s2));
}

double norm(const TwoModeState& state) { return state.amps.norm(); }

Complex inner(const TwoModeState& s1, const TwoModeState& s2) {
    const int r = std::min(s1.dim1(), s2.dim1());
    const int c = std::min(s1.dim2(), s2.dim2());
    return (s1.amps.topLeftCorner(r, c).conjugate().cwiseProduct(
                s2.amps.topLeftCorner(r, c)))
        .sum();
}

void fix_global_phase_first(Eigen::VectorXcd& amps, double threshold) {
    for (int n = 0; n < amps.size(); ++n) {
        if (std::abs(amps[n]) > threshold) {
            amps *= std::polar(1.0, -std::arg(amps[n]));
            return;
        }
    }
}

void fix_global_phase_largest(Eigen::VectorXcd& amps) {
    int best = 0;
    for (int n = 1; n < amps.size(); ++n) {
        if (std::abs(amps[n]) > std::abs(amps[best])) best = n;
    }
    amps *= std::polar(1.0, -std::arg(amps[best]));
}

ModeState normalized_state(Eigen::VectorXcd amps) {
    const double n = amps.norm();
    if (n == 0.0) throw ValidationError("cannot normalize the zero vector");
    amps /= n;
    return ModeState{std::move(amps)};
}

Eigen::MatrixXcd annihilation_matrix(int dim) {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim, dim);
    for (int n = 0; n + 1 < dim; ++n) a(n, n + 1) = std::sqrt(n + 1.0);
    return a;
}

Eigen::MatrixXcd number_matrix(int dim) {
    Eigen::MatrixXcd n = Eigen::MatrixXcd::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) n(k, k) = double(k);
    return n;
}

Eigen::MatrixXcd position_matrix(int dim) {
    const Eigen::MatrixXcd a = annihilation_matrix(dim);
    return (a + a.adjoint()) / std::sqrt(2.0);
}

Eigen::MatrixXcd momentum_matrix(int dim) {
    const Eigen::MatrixXcd a = annihilation_matrix(dim);
    return Complex(0.0, 1.0) * (a.adjoint() - a) / std::sqrt(2.0);
}

Eigen::MatrixXd momentum_squared_matrix(int dim) {
    Eigen::MatrixXd p2 = Eigen::MatrixXd::Zero(dim, dim);
    for (int n = 0; n < dim; ++n) {
        p2(n, n) = n + 0.5;
        if (n + 2 < dim) {
            const double v = -0.5 * std::sqrt((n + 1.0) * (n + 2.0));
            p2(n, n + 2) = v;
            p2(n + 2, n) = v;
        }
    }
    return p2;
}

Eigen::MatrixXcd exp_antihermitian(const Eigen::MatrixXcd& a) {
    // A anti-Hermitian: H = -iA is Hermitian and exp(A) = V e^{i diag} V†.
    const Eigen::MatrixXcd h = Complex(0.0, -1.0) * a;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    Eigen::VectorXcd phases(a.rows());
    for (int k = 0; k < a.rows(); ++k) {
        phases[k] = std::polar(1.0, es.eigenvalues()[k]);
    }
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

Eigen::MatrixXcd apply_a1(const Eigen::MatrixXcd& grid) {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(grid.rows(), grid.cols());
    for (int n1 = 0; n1 + 1 < grid.rows(); ++n1) {
        out.row(n1) = std::sqrt(n1 + 1.0) * grid.row(n1 + 1);
    }
    return out;
}

Eigen::MatrixXcd apply_a2(const Eigen::MatrixXcd& grid) {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(grid.rows(), grid.cols());
    for (int n2 = 0; n2 + 1 < grid.cols(); ++n2) {
        out.col(n2) = std::sqrt(n2 + 1.0) * grid.col(n2 + 1);
    }
    return out;
}

Complex expect_a1(const TwoModeState& state) {
    return (state.amps.conjugate().cwiseProduct(apply_a1(state.amps))).sum();
}

Complex expect_a2_mode(const TwoModeState& state) {
    return (state.amps.conjugate().cwiseProduct(apply_a2(state.amps))).sum();
}

Complex expect_a1dag_a2(const TwoModeState& state) {
    // <a1† a2> = <a1 psi | a2 psi>
    const Eigen::MatrixXcd lhs = apply_a1(state.amps);
    const Eigen::MatrixXcd rhs = apply_a2(state.amps);
    return (lhs.conjugate().cwiseProduct(rhs)).sum();
}

}  // namespace qmetro
