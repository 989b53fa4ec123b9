#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "omc/bounds.hpp"
#include "omc/rsvd.hpp"
#include "omc/types.hpp"
#include "oracles.hpp"

#include <Eigen/Dense>

using namespace omc;

namespace {

BoundInputs base_inputs() {
    BoundInputs in;
    in.m = 100;
    in.n = 100;
    in.k = 9;
    in.p = 9;
    in.q = 0;
    in.lambda = 1.0;
    in.sigma_tail = Vector::Ones(1);
    return in;
}

}  // namespace

TEST_CASE("tail s-norm is the plain vector s-norm") {
    Vector tail(3);
    tail << 3.0, 4.0, 0.0;
    CHECK(tail_s_norm(tail, 1.0) == doctest::Approx(7.0));
    CHECK(tail_s_norm(tail, 2.0) == doctest::Approx(5.0));
    CHECK(tail_s_norm(Vector(), 1.0) == 0.0);
    CHECK_THROWS_AS(tail_s_norm(tail, 0.5), std::invalid_argument);
}

TEST_CASE("spectral bound reproduces the hand-computed value 21") {
    // bracket = 1 + 4 sqrt(2*100/8) = 1 + 4*5 = 21, exponent 1, tail head 1
    const BoundInputs in = base_inputs();
    CHECK(spectral_bound(in) == doctest::Approx(21.0).epsilon(1e-12));
    CHECK(spectral_hypothesis_holds(in));
}

TEST_CASE("spectral bound scales with the tail head and decays toward it in q") {
    BoundInputs in = base_inputs();
    in.sigma_tail = Vector::Zero(3);
    CHECK(spectral_bound(in) == 0.0);

    in.sigma_tail = Vector::Ones(1) * 0.25;
    double previous = spectral_bound(in);
    for (Index q = 1; q <= 6; ++q) {
        in.q = q;
        const double current = spectral_bound(in);
        CHECK(current < previous);
        CHECK(current > 0.25);
        previous = current;
    }
    in.q = 100;
    CHECK(spectral_bound(in) == doctest::Approx(0.25).epsilon(0.02));
}

TEST_CASE("spectral bound rejects k below 2 and flags p != k") {
    BoundInputs in = base_inputs();
    in.k = 1;
    CHECK_THROWS_AS(spectral_bound(in), std::invalid_argument);
    in.k = 9;
    in.p = 5;
    CHECK_FALSE(spectral_hypothesis_holds(in));
    CHECK(spectral_bound(in) == doctest::Approx(21.0).epsilon(1e-12));  // still evaluates
}

TEST_CASE("frobenius bound reproduces the hand-computed value 24") {
    // (k+p)(1 + k/(p-1)) * 1-norm of tail = 4 * 3 * 2 with k=p=2, q=0
    BoundInputs in;
    in.m = 50;
    in.n = 50;
    in.k = 2;
    in.p = 2;
    in.q = 0;
    in.sigma_tail = Vector::Ones(2);
    CHECK(frobenius_power_bound(in) == doctest::Approx(24.0).epsilon(1e-12));

    in.p = 1;
    CHECK_THROWS_AS(frobenius_power_bound(in), std::invalid_argument);
}

TEST_CASE("frobenius bound is nonincreasing in q when the tail is below one") {
    BoundInputs in;
    in.m = 80;
    in.n = 60;
    in.k = 4;
    in.p = 3;
    Vector tail(5);
    tail << 0.9, 0.5, 0.3, 0.1, 0.05;
    in.sigma_tail = tail;
    double previous = std::numeric_limits<double>::infinity();
    for (Index q = 0; q <= 5; ++q) {
        in.q = q;
        const double current = frobenius_power_bound(in);
        CHECK(current <= previous + 1e-12);
        previous = current;
    }
    in.sigma_tail = Vector::Zero(4);
    CHECK(frobenius_power_bound(in) == 0.0);
}

TEST_CASE("objective gap bound reproduces the hand-computed value 217.625") {
    // 9*22*1 + 0.5 + 9*(17/8)*1 = 198 + 0.5 + 19.125
    const BoundInputs in = base_inputs();
    CHECK(objective_gap_bound(in) == doctest::Approx(217.625).epsilon(1e-12));
}

TEST_CASE("objective gap bound term structure") {
    BoundInputs in = base_inputs();
    in.sigma_tail = Vector();
    CHECK(objective_gap_bound(in) == 0.0);

    in = base_inputs();
    in.lambda = 0.0;
    // only the first term carries lambda: 0.5 + 19.125 remain
    CHECK(objective_gap_bound(in) == doctest::Approx(19.625).epsilon(1e-12));
    in.lambda = 2.0;
    CHECK(objective_gap_bound(in) == doctest::Approx(2.0 * 198.0 + 19.625).epsilon(1e-12));

    in.k = 1;
    CHECK_THROWS_AS(objective_gap_bound(in), std::invalid_argument);
}

TEST_CASE("bound evaluators are pure") {
    const BoundInputs in = base_inputs();
    CHECK(spectral_bound(in) == spectral_bound(in));
    CHECK(objective_gap_bound(in) == objective_gap_bound(in));
    BoundInputs fro = in;
    fro.k = 3;
    fro.p = 4;
    fro.sigma_tail = Vector::Ones(4) * 0.3;
    CHECK(frobenius_power_bound(fro) == frobenius_power_bound(fro));
}

namespace {

// The Frobenius side of the comparison concentrates its mass in a few
// directions only when the spectrum decays, so these property tests run on
// geometric spectra rather than flat Gaussian ones.
Matrix decaying_instance(std::uint64_t seed) {
    Vector sigma(20);
    for (Index i = 0; i < 20; ++i) sigma[i] = std::pow(0.7, double(i));
    return matrix_with_spectrum(30, 20, sigma, seed);
}

}  // namespace

TEST_CASE("power scheme sides collapse at q = 0") {
    const Matrix a = decaying_instance(31);
    const Matrix omega = oracle::random_dense(20, 6, 32);
    const PowerSchemeSides sides = power_scheme_check(a, omega, 0);
    // with q = 0 the compared matrix is A itself, so both spectral sides agree
    CHECK(sides.spectral_lhs == doctest::Approx(sides.spectral_rhs).epsilon(1e-10));
    CHECK(sides.frobenius_lhs <= sides.frobenius_rhs * (1.0 + 1e-10));
}

TEST_CASE("power scheme inequality holds on decaying-spectrum instances") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const Matrix a = decaying_instance(40 + seed);
        const Matrix omega = oracle::random_dense(20, 5, 60 + seed);
        for (const Index q : {1, 2, 3}) {
            const PowerSchemeSides sides = power_scheme_check(a, omega, q);
            CHECK(sides.spectral_lhs <= sides.spectral_rhs * (1.0 + 1e-9));
            CHECK(sides.frobenius_lhs <= sides.frobenius_rhs * (1.0 + 1e-9));
        }
    }
}

TEST_CASE("a basis spanning the whole column space kills both residuals") {
    const Matrix a = oracle::random_dense(15, 6, 70);
    const Matrix omega = Matrix::Identity(6, 6);  // full sampling
    const PowerSchemeSides sides = power_scheme_check(a, omega, 0);
    CHECK(sides.spectral_lhs < 1e-10);
    CHECK(sides.frobenius_lhs < 1e-10);
    CHECK(sides.spectral_rhs < 1e-8);
}

TEST_CASE("monte-carlo means sit under their bounds on a geometric spectrum") {
    const Index m = 60, n = 40, k = 5;
    Vector sigma(n);
    for (Index i = 0; i < n; ++i) sigma[i] = std::pow(0.75, double(i));
    const Matrix a = matrix_with_spectrum(m, n, sigma, 80);
    BoundInputs in;
    in.m = m;
    in.n = n;
    in.k = k;
    in.sigma_tail = sigma.tail(n - k);
    for (const Index q : {0, 1}) {
        in.q = q;
        in.p = k;
        const TrialSummary spect = rsvd_error_trials(a, {k, k, q, 81}, 40);
        CHECK(spect.mean_spectral_error <= spectral_bound(in));
        in.p = 3;
        const TrialSummary fro = rsvd_error_trials(a, {k, 3, q, 82}, 40);
        CHECK(fro.mean_residual_sq <= frobenius_power_bound(in));
    }
}
