#include <doctest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <stdexcept>

#include "fito/functions.hpp"
#include "fito/hermite.hpp"

using namespace fito;

TEST_CASE("Hermite polynomials with variance parameter") {
    const double s2 = 2.0, x = 1.3;
    CHECK(hermite_eval(0, s2, x) == 1.0);
    CHECK(hermite_eval(1, s2, x) == doctest::Approx(x));
    CHECK(hermite_eval(2, s2, x) == doctest::Approx(x * x - s2));
    CHECK(hermite_eval(3, s2, x) == doctest::Approx(x * x * x - 3 * s2 * x));
    CHECK(hermite_eval(4, s2, x) == doctest::Approx(std::pow(x, 4) - 6 * s2 * x * x + 3 * s2 * s2));
    const HermiteBasis hb(s2, 5);
    const auto all = hb.eval_all(x);
    for (int n = 0; n <= 5; ++n) CHECK(all[n] == doctest::Approx(hermite_eval(n, s2, x)));
    CHECK(hb.norm2(3) == doctest::Approx(6 * 8.0));
}

TEST_CASE("coefficients of x^2 and x^3") {
    const double s2 = 0.7;
    const double s = std::sqrt(s2);
    // x^2 = H_2 + s2, x^3 = H_3 + 3 s2 H_1
    const auto c2 = hermite_coeffs(ScalarFunction::parse("x2"), s2, 6);
    CHECK(c2.converged);
    CHECK(c2.c[0] == doctest::Approx(s2).epsilon(1e-12));
    CHECK(std::abs(c2.c[1]) < 1e-12);
    CHECK(c2.c[2] == doctest::Approx(std::sqrt(2.0) * s2).epsilon(1e-12));
    CHECK(std::abs(c2.c[3]) < 1e-12);
    const auto c3 = hermite_coeffs(ScalarFunction::parse("x3"), s2, 6);
    CHECK(c3.c[1] == doctest::Approx(3 * s2 * s).epsilon(1e-12));
    CHECK(c3.c[3] == doctest::Approx(std::sqrt(6.0) * s2 * s).epsilon(1e-12));
}

TEST_CASE("coefficients of exp(lambda x^2) against tanh-sinh") {
    const double s2 = 0.5, lambda = 0.3;
    const auto c = hermite_coeffs(ScalarFunction::expsq(lambda), s2, 6);
    CHECK(c.converged);
    boost::math::quadrature::tanh_sinh<double> ts;
    for (int n : {0, 2, 4}) {
        auto f = [&](double x) {
            const double dens = std::exp(-x * x / (2 * s2)) / std::sqrt(2 * M_PI * s2);
            return std::exp(lambda * x * x) * hermite_eval(n, s2, x) * dens;
        };
        const double ref = ts.integrate(f, -40.0, 40.0, 1e-14) / (std::sqrt(std::tgamma(n + 1.0)) * std::pow(s2, n / 2.0));
        CHECK(c.c[n] == doctest::Approx(ref).epsilon(1e-9));
    }
}

TEST_CASE("exp(lambda x^2) outside the square-integrable range is refused") {
    CHECK_THROWS_AS(hermite_coeffs(ScalarFunction::expsq(0.6), 1.0, 4), std::domain_error);
    CHECK_NOTHROW(hermite_coeffs(ScalarFunction::expsq(0.2), 1.0, 4));
}

TEST_CASE("derivative shift relation for polynomials") {
    for (int deg = 1; deg <= 8; ++deg) {
        std::vector<double> coeffs(deg + 1);
        for (int k = 0; k <= deg; ++k) coeffs[k] = std::cos(1.0 + k);
        const auto F = ScalarFunction::polynomial(coeffs);
        for (double s2 : {0.3, 1.0, 2.5}) CHECK(derivative_shift_check(F, s2, 6) < 1e-8);
    }
}

TEST_CASE("gradient factor of F(B_t) against direct quadrature") {
    const double H = 0.7, t = 1.0;
    const double beta = std::tgamma(H - 0.5) * std::tgamma(2 - 2 * H) / std::tgamma(1.5 - H);
    const double A = std::sqrt(H * (2 * H - 1) / beta) * std::tgamma(H - 0.5);
    const double pref = A * beta / std::pow(std::tgamma(H - 0.5), 2);
    boost::math::quadrature::tanh_sinh<double> ts;
    for (double s : {0.3, 0.7, 1.4}) {
        // distance to the singular point from the endpoint complement, no cancellation
        auto left = [&](double r, double rc) { return std::pow(rc > 0 ? rc : s - r, 2 * H - 2); };
        auto right = [&](double r, double rc) { return std::pow(rc < 0 ? -rc : r - s, 2 * H - 2); };
        auto plain = [&](double r) { return std::pow(s - r, 2 * H - 2); };
        const double tol = 1e-15;
        const double I = s < t ? ts.integrate(left, 0.0, s, tol) + ts.integrate(right, s, t, tol)
                               : ts.integrate(plain, 0.0, t, tol);
        CHECK(grad_fbm_closed_form(H, t, s) == doctest::Approx(pref * I).epsilon(1e-10));
    }
}
