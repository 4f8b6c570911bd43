#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "qmetro/fock.hpp"
#include "test_helpers.hpp"

using namespace qmetro;
using qmetro::testing::random_mode_state;

namespace {

const TruncationPolicy kDim40{40, 1e-10};
const TruncationPolicy kDim60{60, 1e-10};

}  // namespace

TEST_CASE("coherent state") {
    SUBCASE("alpha = 0 is vacuum") {
        const ModeState s = make_coherent(0.0, kDim40);
        CHECK(std::abs(s.amps[0] - 1.0) < 1e-15);
        CHECK(s.amps.tail(39).norm() == 0.0);
    }
    SUBCASE("mean photon number is |alpha|^2") {
        const ModeState s = make_coherent(2.0, kDim40);
        CHECK(expect_n(s) == doctest::Approx(4.0).epsilon(1e-8));
    }
    SUBCASE("vacuum amplitude e^{-|alpha|^2/2}") {
        const ModeState s = make_coherent(2.0, kDim40);
        CHECK(std::abs(s.amps[0] - std::exp(-2.0)) < 1e-12);
    }
    SUBCASE("complex alpha keeps first amplitude real positive") {
        const ModeState s = make_coherent(Complex(1.0, 1.5), kDim40);
        CHECK(s.amps[0].imag() == 0.0);
        CHECK(s.amps[0].real() > 0.0);
    }
    SUBCASE("large alpha needs log-space weights") {
        const TruncationPolicy pol = TruncationPolicy::for_mean_photon(400.0);
        const ModeState s = make_coherent(20.0, pol);
        CHECK(expect_n(s) == doctest::Approx(400.0).epsilon(1e-8));
    }
    SUBCASE("too small a basis throws") {
        CHECK_THROWS_AS(make_coherent(5.0, TruncationPolicy{10, 1e-10}),
                        TruncationTooSmall);
    }
}

TEST_CASE("squeezed vacuum") {
    SUBCASE("r = 0 is vacuum") {
        const ModeState s = make_squeezed_vacuum(0.0, kDim40);
        CHECK(std::abs(s.amps[0] - 1.0) < 1e-15);
    }
    SUBCASE("mean photon number sinh^2 r") {
        const ModeState s = make_squeezed_vacuum(std::asinh(1.0), kDim60);
        CHECK(expect_n(s) == doctest::Approx(1.0).epsilon(1e-8));
    }
    SUBCASE("quadrature variances e^{2r}/2 and e^{-2r}/2") {
        const Moments m = moments(make_squeezed_vacuum(0.5, kDim40));
        CHECK(m.var_p == doctest::Approx(std::exp(1.0) / 2.0).epsilon(1e-9));
        CHECK(m.var_x == doctest::Approx(std::exp(-1.0) / 2.0).epsilon(1e-9));
    }
    SUBCASE("odd levels are exactly empty") {
        const ModeState s = make_squeezed_vacuum(0.8, kDim60);
        for (int n = 1; n < s.dim(); n += 2) CHECK(s.amps[n] == Complex(0.0, 0.0));
    }
    SUBCASE("closed form matches the matrix exponential of r(a^2 - a+2)/2") {
        // dim leaves ample headroom: the exponential of the truncated
        // generator is only the true state where the tail is negligible
        const int dim = 70;
        const double r = 0.5;
        const ModeState closed = make_squeezed_vacuum(r, TruncationPolicy{dim, 1e-10});
        const Eigen::MatrixXcd a = annihilation_matrix(dim);
        const Eigen::MatrixXcd gen =
            0.5 * r * (a * a - (a * a).adjoint().eval());
        Eigen::VectorXcd vac = Eigen::VectorXcd::Zero(dim);
        vac[0] = 1.0;
        const Eigen::VectorXcd expm = exp_antihermitian(gen) * vac;
        CHECK((closed.amps - expm).norm() < 1e-10);
    }
    SUBCASE("truncation guard") {
        CHECK_THROWS_AS(make_squeezed_vacuum(2.0, TruncationPolicy{20, 1e-10}),
                        TruncationTooSmall);
    }
}

TEST_CASE("number state") {
    SUBCASE("n = 0 is vacuum") {
        const ModeState s = make_number(0, kDim40);
        CHECK(std::abs(s.amps[0] - 1.0) == 0.0);
    }
    SUBCASE("exact photon number") {
        const ModeState s = make_number(3, TruncationPolicy{10, 1e-10});
        CHECK(expect_n(s) == 3.0);
        CHECK(moments(s).var_n == 0.0);
    }
    SUBCASE("momentum variance n + 1/2") {
        CHECK(moments(make_number(3, kDim40)).var_p == doctest::Approx(3.5).epsilon(1e-12));
    }
    SUBCASE("level outside basis") {
        CHECK_THROWS_AS(make_number(10, TruncationPolicy{10, 1e-10}), IndexOutOfRange);
    }
}

TEST_CASE("displacement") {
    SUBCASE("displaced vacuum is coherent") {
        const ModeState d = displace(make_number(0, kDim40), Complex(1.2, -0.4));
        const ModeState c = make_coherent(Complex(1.2, -0.4), kDim40);
        CHECK(fidelity(d, c) >= 1.0 - 1e-10);
    }
    SUBCASE("zero displacement is the identity") {
        const ModeState s = make_coherent(1.0, kDim40);
        const ModeState d = displace(s, 0.0);
        CHECK((d.amps - s.amps).norm() < 1e-12);
    }
    SUBCASE("inverse displacement returns to vacuum") {
        const ModeState d = displace(make_coherent(1.0, kDim40), -1.0);
        CHECK(fidelity(d, make_number(0, kDim40)) >= 1.0 - 1e-10);
    }
    SUBCASE("displacement out of the basis throws") {
        CHECK_THROWS_AS(displace(make_number(0, TruncationPolicy{6, 1e-10}), 3.0),
                        TruncationTooSmall);
    }
}

TEST_CASE("tensor product") {
    SUBCASE("vacuum x vacuum") {
        const TwoModeState s = tensor(make_number(0, kDim40), make_number(0, kDim40));
        CHECK(std::abs(s.amps(0, 0) - 1.0) == 0.0);
        CHECK(norm(s) == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("coherent x vacuum has a Poisson first-mode marginal") {
        const double mu = 2.25;
        const TwoModeState s =
            tensor(make_coherent(1.5, kDim40), make_number(0, kDim40));
        for (int n = 0; n < 8; ++n) {
            double marg = 0.0;
            for (int n2 = 0; n2 < s.dim2(); ++n2) marg += std::norm(s.amps(n, n2));
            const double poisson =
                std::exp(-mu + n * std::log(mu) - std::lgamma(n + 1.0));
            CHECK(marg == doctest::Approx(poisson).epsilon(1e-10));
        }
    }
    SUBCASE("any tensor of unit states is unit") {
        std::mt19937_64 rng(11);
        for (int it = 0; it < 5; ++it) {
            const TwoModeState s =
                tensor(random_mode_state(rng, 24), random_mode_state(rng, 16));
            CHECK(norm(s) == doctest::Approx(1.0).epsilon(1e-13));
        }
    }
}

TEST_CASE("moments") {
    SUBCASE("vacuum is minimum uncertainty") {
        const Moments m = moments(make_number(0, kDim40));
        CHECK(m.var_x == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(m.var_p == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(m.mean_photon == 0.0);
    }
    SUBCASE("coherent state displaces means, keeps vacuum variances") {
        const Moments m = moments(make_coherent(2.0, kDim40));
        CHECK(m.mean_x == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-10));
        CHECK(m.mean_p == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(m.var_x == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(m.var_p == doctest::Approx(0.5).epsilon(1e-9));
    }
    SUBCASE("squeezed vacuum is minimum uncertainty") {
        for (const double r : {0.2, 0.5, 0.9}) {
            const Moments m = moments(make_squeezed_vacuum(r, TruncationPolicy::for_squeezed(r)));
            CHECK(std::abs(m.var_x * m.var_p - 0.25) < 1e-9);
        }
    }
}

TEST_CASE("state invariants") {
    std::mt19937_64 rng(7);
    SUBCASE("constructors normalize to 1e-12") {
        CHECK(std::abs(make_coherent(2.0, kDim40).amps.norm() - 1.0) < 1e-12);
        CHECK(std::abs(make_squeezed_vacuum(0.8, kDim60).amps.norm() - 1.0) < 1e-12);
        CHECK(std::abs(make_number(5, kDim40).amps.norm() - 1.0) < 1e-12);
    }
    SUBCASE("uncertainty principle on random states") {
        for (int it = 0; it < 50; ++it) {
            const Moments m = moments(random_mode_state(rng, 40));
            CHECK(m.var_x * m.var_p >= 0.25 - 1e-9);
        }
    }
    SUBCASE("<x^2> + <p^2> = 2<N> + 1 on random states") {
        for (int it = 0; it < 50; ++it) {
            const ModeState s = random_mode_state(rng, 40);
            const Moments m = moments(s);
            const double lhs = (m.var_x + m.mean_x * m.mean_x) +
                               (m.var_p + m.mean_p * m.mean_p);
            CHECK(lhs == doctest::Approx(2.0 * m.mean_photon + 1.0).epsilon(1e-9));
        }
    }
    SUBCASE("truncated annihilation obeys [a, a+] = 1 off the top level") {
        const int dim = 12;
        const Eigen::MatrixXcd a = annihilation_matrix(dim);
        const Eigen::MatrixXcd comm = a * a.adjoint() - a.adjoint() * a;
        for (int n = 0; n + 1 < dim; ++n) {
            CHECK(std::abs(comm(n, n) - 1.0) < 1e-14);
        }
    }
}

TEST_CASE("policy validation") {
    CHECK_THROWS_AS(make_coherent(1.0, TruncationPolicy{1, 1e-10}), ValidationError);
    CHECK_THROWS_AS(make_coherent(1.0, TruncationPolicy{16, -1.0}), ValidationError);
    CHECK(TruncationPolicy::for_mean_photon(4.0).dim >= 40);
    CHECK(TruncationPolicy::for_squeezed(std::asinh(2.0)).dim > 100);
}
