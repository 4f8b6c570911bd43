#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "qmetro/fisher.hpp"
#include "test_helpers.hpp"

using namespace qmetro;
using qmetro::testing::random_even_mode_state;
using qmetro::testing::random_mode_state;

namespace {

const TruncationPolicy kDim32{32, 1e-10};
const TruncationPolicy kDim48{48, 1e-10};

// Finite-difference oracle for the derivative-state route, central step h.
FisherMatrix qfi_finite_difference(const TwoModeState& input, const PhasePair& pair,
                                   double h) {
    const int cap = input.dim1() + input.dim2() - 2;
    const TwoModeOperator b = beam_splitter(cap);
    const TwoModeState after_bs = apply(b, input);
    const auto psi_at = [&](double s, double d) {
        return apply(phase_shift(PhasePair{s, d}, cap), after_bs);
    };
    const TwoModeState psi = psi_at(pair.phi_s, pair.phi_d);
    const auto diff = [&](bool wrt_s) {
        const TwoModeState plus = wrt_s ? psi_at(pair.phi_s + h, pair.phi_d)
                                        : psi_at(pair.phi_s, pair.phi_d + h);
        const TwoModeState minus = wrt_s ? psi_at(pair.phi_s - h, pair.phi_d)
                                         : psi_at(pair.phi_s, pair.phi_d - h);
        return ((plus.amps - minus.amps) / (2.0 * h)).eval();
    };
    const Eigen::MatrixXcd ds = diff(true);
    const Eigen::MatrixXcd dd = diff(false);
    const auto dot = [](const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
        return (a.conjugate().cwiseProduct(b)).sum();
    };
    const Complex os = dot(ds, psi.amps);
    const Complex od = dot(dd, psi.amps);
    FisherMatrix fm;
    fm.f_ss = 4.0 * (dot(ds, ds).real() - std::norm(os));
    fm.f_dd = 4.0 * (dot(dd, dd).real() - std::norm(od));
    fm.f_sd = 4.0 * (dot(ds, dd) - os * std::conj(od)).real();
    return fm;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0}); }

void check_close(const FisherMatrix& a, const FisherMatrix& b, double tol) {
    const double scale = std::max({std::abs(a.f_ss), std::abs(a.f_dd), std::abs(a.f_sd), 1.0});
    CHECK(std::abs(a.f_ss - b.f_ss) / scale < tol);
    CHECK(std::abs(a.f_dd - b.f_dd) / scale < tol);
    CHECK(std::abs(a.f_sd - b.f_sd) / scale < tol);
}

}  // namespace

TEST_CASE("derivative-state route") {
    SUBCASE("coherent x vacuum sits at shot noise") {
        const TwoModeState in = tensor(make_coherent(2.0, kDim48), make_number(0, kDim32));
        const FisherMatrix fm = qfi_from_derivatives(in, PhasePair{0.3, 0.7});
        CHECK(rel_err(fm.f_dd, 4.0) < 1e-8);
    }
    SUBCASE("vacuum x vacuum carries no phase information") {
        const TwoModeState in = tensor(make_number(0, kDim32), make_number(0, kDim32));
        const FisherMatrix fm = qfi_from_derivatives(in, PhasePair{0.0, 0.0});
        CHECK(std::abs(fm.f_ss) < 1e-12);
        CHECK(std::abs(fm.f_dd) < 1e-12);
        CHECK(std::abs(fm.f_sd) < 1e-12);
    }
    SUBCASE("coherent x squeezed closed form") {
        const TwoModeState in =
            tensor(make_coherent(3.0, kDim48), make_squeezed_vacuum(0.5, kDim32));
        const FisherMatrix fm = qfi_from_derivatives(in, PhasePair{0.1, 0.4});
        const double expected = 9.0 * std::exp(1.0) + std::sinh(0.5) * std::sinh(0.5);
        CHECK(rel_err(fm.f_dd, expected) < 1e-7);
    }
    SUBCASE("finite-difference cross-check") {
        std::mt19937_64 rng(21);
        const TwoModeState in = tensor(make_coherent(Complex(1.1, 0.6), kDim32),
                                       random_mode_state(rng, 14, 0.5));
        const PhasePair pair{0.2, 0.9};
        const FisherMatrix exact = qfi_from_derivatives(in, pair);
        const FisherMatrix fd = qfi_finite_difference(in, pair, 1e-5);
        check_close(exact, fd, 1e-6);
    }
}

TEST_CASE("covariance route") {
    SUBCASE("matches the derivative route at random phase pairs") {
        std::mt19937_64 rng(2);
        std::uniform_real_distribution<double> phase(-M_PI, M_PI);
        const TwoModeState in = tensor(make_coherent(Complex(0.9, -0.8), kDim32),
                                       random_mode_state(rng, 12, 0.5));
        const FisherMatrix cov = qfi_from_covariance(in);
        for (int it = 0; it < 5; ++it) {
            const FisherMatrix der =
                qfi_from_derivatives(in, PhasePair{phase(rng), phase(rng)});
            check_close(cov, der, 1e-8);
        }
    }
    SUBCASE("number x number has no total-number variance") {
        const TwoModeState in = tensor(make_number(3, kDim32), make_number(2, kDim32));
        const FisherMatrix fm = qfi_from_covariance(in);
        CHECK(std::abs(fm.f_ss) < 1e-12);
        CHECK(fm.f_dd > 0.0);
    }
    SUBCASE("coherent(2) x vacuum moments") {
        const TwoModeState in = tensor(make_coherent(2.0, kDim48), make_number(0, kDim32));
        const FisherMatrix fm = qfi_from_covariance(in);
        CHECK(rel_err(fm.f_ss, 4.0) < 1e-9);
        CHECK(rel_err(fm.f_dd, 4.0) < 1e-9);
        CHECK(std::abs(fm.f_sd) < 1e-9);
    }
}

TEST_CASE("product-input closed form") {
    SUBCASE("vacuum secondary") {
        const FisherMatrix fm = qfi_product_analytic(2.0, make_number(0, kDim32));
        CHECK(fm.f_ss == doctest::Approx(4.0).epsilon(1e-12));
        CHECK(fm.f_dd == doctest::Approx(4.0).epsilon(1e-12));
        CHECK(std::abs(fm.f_sd) < 1e-14);
    }
    SUBCASE("dark primary port leaves the secondary mean photon number") {
        const ModeState chi = make_squeezed_vacuum(0.8, kDim48);
        const FisherMatrix fm = qfi_product_analytic(0.0, chi);
        CHECK(fm.f_dd == doctest::Approx(expect_n(chi)).epsilon(1e-10));
    }
    SUBCASE("squeezed secondary closed form with independent oracle") {
        const ModeState chi = make_squeezed_vacuum(0.5, kDim32);
        const FisherMatrix fm = qfi_product_analytic(3.0, chi);
        const double closed_form = 9.0 * std::exp(1.0) + std::sinh(0.5) * std::sinh(0.5);
        CHECK(fm.f_dd == doctest::Approx(closed_form).epsilon(1e-7));
        // independent oracle: the derivative-state route on the full input
        const TwoModeState in = tensor(make_coherent(3.0, kDim48), chi);
        const FisherMatrix der = qfi_from_derivatives(in, PhasePair{0.0, 0.3});
        CHECK(rel_err(fm.f_dd, der.f_dd) < 1e-7);
    }
    SUBCASE("agrees with the covariance route, complex alpha included") {
        std::mt19937_64 rng(14);
        const Complex alphas[] = {{0.0, 0.0}, {1.2, 0.0}, {0.7, -1.1}, {0.0, 2.0}};
        for (const Complex alpha : alphas) {
            for (int it = 0; it < 4; ++it) {
                const ModeState chi = random_mode_state(rng, 12, 0.5);
                const TruncationPolicy pol =
                    TruncationPolicy::for_mean_photon(std::norm(alpha));
                const TwoModeState in = tensor(make_coherent(alpha, pol), chi);
                check_close(qfi_product_analytic(alpha, chi), qfi_from_covariance(in), 1e-8);
            }
        }
    }
    SUBCASE("one-sided cross entry disagrees and is flagged") {
        // The correct cross entry is Hermitian-symmetric; the one-sided form
        // drops the conjugate displacement term and even fails to be real.
        const Complex alpha(2.0, 0.0);
        const ModeState chi = make_coherent(Complex(0.0, 0.7), kDim32);
        const FisherMatrix sym = qfi_product_analytic(alpha, chi);
        const Complex one_sided = fsd_one_sided(alpha, chi);
        const TwoModeState in = tensor(make_coherent(alpha, kDim48), chi);
        const FisherMatrix cov = qfi_from_covariance(in);
        CHECK(std::abs(sym.f_sd - cov.f_sd) < 1e-8);
        CHECK(std::abs(one_sided - Complex(sym.f_sd, 0.0)) > 0.1);
        MESSAGE("one-sided f_sd = ", one_sided.real(), " + ", one_sided.imag(),
                "i vs symmetric/covariance f_sd = ", sym.f_sd,
                " (one-sided form rejected)");
    }
}

TEST_CASE("quadrature form of f_dd") {
    SUBCASE("vacuum gives alpha^2") {
        CHECK(fdd_quadrature(7.0, make_number(0, kDim32)) ==
              doctest::Approx(7.0).epsilon(1e-12));
    }
    SUBCASE("number state") {
        CHECK(fdd_quadrature(10.0, make_number(3, kDim32)) ==
              doctest::Approx(73.0).epsilon(1e-10));
    }
    SUBCASE("squeezed state, alpha^2 = 100") {
        const double v = fdd_quadrature(100.0, make_squeezed_vacuum(std::asinh(1.0), TruncationPolicy{60, 1e-10}));
        CHECK(std::abs(v - 583.84271247461902) < 1e-4);
    }
    SUBCASE("matches the closed form for real alpha") {
        std::mt19937_64 rng(33);
        for (int it = 0; it < 10; ++it) {
            const ModeState chi = random_mode_state(rng, 14, 0.5);
            const double asq = 2.5;
            const FisherMatrix fm = qfi_product_analytic(std::sqrt(asq), chi);
            CHECK(std::abs(fdd_quadrature(asq, chi) - fm.f_dd) < 1e-9 * std::max(1.0, fm.f_dd));
        }
    }
}

TEST_CASE("fmax bound and decomposition") {
    SUBCASE("vacuum constraint recovers shot noise") {
        CHECK(fmax_bound(9.0, 0.0).f_max == doctest::Approx(9.0).epsilon(1e-15));
    }
    SUBCASE("alpha^2 = 100, nbar = 1") {
        const FmaxReport rep = fmax_bound(100.0, 1.0);
        CHECK(rep.f_max == doctest::Approx(583.84271247461902).epsilon(1e-12));
        CHECK(rep.remainder_r == doctest::Approx(183.84271247461902).epsilon(1e-12));
        CHECK(rep.remainder_r >= 101.0);
        CHECK(rep.remainder_r <= 201.0);
    }
    SUBCASE("balanced point") {
        const FmaxReport rep = fmax_bound(4.0, 4.0);
        CHECK(rep.f_max == doctest::Approx(4.0 * (8.0 + 2.0 * std::sqrt(20.0) + 1.0) + 4.0)
                               .epsilon(1e-13));
        CHECK(rep.heisenberg_term == doctest::Approx(64.0).epsilon(1e-15));
        CHECK(rep.remainder_r >= 8.0);
        CHECK(rep.remainder_r <= 12.0);
        // f_max = n_tot^2 - imbalance + R holds exactly
        CHECK(rep.f_max == doctest::Approx(rep.heisenberg_term - rep.imbalance_term +
                                           rep.remainder_r)
                               .epsilon(1e-12));
    }
}

TEST_CASE("qcrb check") {
    FisherMatrix fm;
    fm.f_ss = 5.0;
    fm.f_dd = 3.0;
    fm.f_sd = 1.0;
    Eigen::Matrix2d finv;
    finv << fm.f_dd, -fm.f_sd, -fm.f_sd, fm.f_ss;
    finv /= fm.det();
    SUBCASE("equality is satisfied with zero margin") {
        const QcrbReport rep = qcrb_check(fm, finv);
        CHECK(rep.satisfied);
        CHECK(std::abs(rep.min_eigenvalue) < 1e-12);
        CHECK(std::abs(rep.trace_margin) < 1e-12);
    }
    SUBCASE("twice the inverse is satisfied") {
        const QcrbReport rep = qcrb_check(fm, (2.0 * finv).eval());
        CHECK(rep.satisfied);
        CHECK(rep.trace_margin > 0.0);
        CHECK(rep.det_margin > 0.0);
    }
    SUBCASE("half the inverse is violated") {
        CHECK_FALSE(qcrb_check(fm, (0.5 * finv).eval()).satisfied);
    }
    SUBCASE("singular Fisher matrix throws") {
        FisherMatrix sing;
        sing.f_ss = 1.0;
        sing.f_dd = 1.0;
        sing.f_sd = 1.0;
        CHECK_THROWS_AS(qcrb_check(sing, finv), SingularFisher);
    }
}

TEST_CASE("three-route agreement on a randomized product suite") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> amag(0.0, 2.0);
    for (int it = 0; it < 12; ++it) {
        ModeState chi = make_number(0, TruncationPolicy{16, 1e-10});
        switch (it % 6) {
            case 0: break;  // vacuum
            case 1: chi = make_coherent(0.8, TruncationPolicy{36, 1e-10}); break;
            case 2: chi = make_squeezed_vacuum(0.6, TruncationPolicy{44, 1e-10}); break;
            case 3: chi = make_number(4, TruncationPolicy{16, 1e-10}); break;
            case 4: chi = random_even_mode_state(rng, 14); break;
            case 5: chi = random_mode_state(rng, 14, 0.5); break;
        }
        const double a = amag(rng);
        const TruncationPolicy pol = TruncationPolicy::for_mean_photon(a * a);
        const TwoModeState in = tensor(make_coherent(a, pol), chi);
        const FisherMatrix analytic = qfi_product_analytic(a, chi);
        const FisherMatrix cov = qfi_from_covariance(in);
        const FisherMatrix der = qfi_from_derivatives(in, PhasePair{0.15, 0.6});
        check_close(analytic, cov, 1e-7);
        check_close(analytic, der, 1e-7);
        // PSD within tolerance
        const double scale = std::max({analytic.f_ss, analytic.f_dd, 1.0});
        CHECK(analytic.det() >= -1e-9 * scale * scale);
    }
}

TEST_CASE("bound dominance and equality condition") {
    std::mt19937_64 rng(19);
    const double alpha_sq = 4.0;
    int near_bound = 0;
    for (int it = 0; it < 60; ++it) {
        ModeState chi = random_mode_state(rng, 18, 0.55);
        if (it % 5 == 0) {
            // plant squeezed states so the equality branch is exercised
            chi = make_squeezed_vacuum(0.2 + 0.1 * (it % 7), TruncationPolicy{48, 1e-10});
        }
        const double nbar = expect_n(chi);
        const double f = fdd_quadrature(alpha_sq, chi);
        const double fmax = fmax_bound(alpha_sq, nbar).f_max;
        CHECK(f <= fmax + 1e-9 * std::max(1.0, fmax));
        if (f >= 0.999 * fmax) {
            ++near_bound;
            const Moments m = moments(chi);
            CHECK(m.var_x * m.var_p == doctest::Approx(0.25).epsilon(1e-4));
            CHECK(std::abs(m.mean_x) < 1e-3);
            CHECK(std::abs(m.mean_p) < 1e-3);
            const ModeState ref = make_squeezed_vacuum(std::asinh(std::sqrt(nbar)),
                                                       TruncationPolicy{chi.dim(), 1.0});
            CHECK(fidelity(chi, ref) >= 0.999);
        }
    }
    CHECK(near_bound > 0);
}

TEST_CASE("variance-sum bound needs zero means") {
    // var_x + var_p <= 2 nbar + 1, equality iff <x> = <p> = 0.
    const ModeState zero_mean = make_squeezed_vacuum(0.4, kDim48);
    const Moments mz = moments(zero_mean);
    CHECK(mz.var_x + mz.var_p ==
          doctest::Approx(2.0 * mz.mean_photon + 1.0).epsilon(1e-10));

    const ModeState displaced = displace(zero_mean, Complex(0.6, -0.3));
    const Moments md = moments(displaced);
    CHECK(md.var_x + md.var_p < 2.0 * md.mean_photon + 1.0 - 0.1);
}

TEST_CASE("heisenberg point and large-alpha trend") {
    for (const double n : {1.0, 2.0, 4.0, 9.0}) {
        const FmaxReport rep = fmax_bound(n, n);
        CHECK(rep.f_max >= rep.heisenberg_term);
    }
    const double r = 0.5;
    const double nbar = std::sinh(r) * std::sinh(r);
    double prev = 1.0;
    for (const double asq : {10.0, 100.0, 1000.0, 10000.0}) {
        const double fmax = fmax_bound(asq, nbar).f_max;
        const double gap = std::abs(fmax - asq * std::exp(2.0 * r)) / fmax;
        CHECK(gap < prev);
        prev = gap;
    }
}
