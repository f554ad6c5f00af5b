#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nlap/errors.hpp"
#include "nlap/quadrature.hpp"

#include "oracles.hpp"

#include <cmath>

using nlap::integrate_adaptive;

TEST_CASE("gauss4 table is a valid degree-7 rule") {
    double wsum = 0.0;
    for (int i = 0; i < 4; ++i) {
        wsum += nlap::kGauss4W[i];
        CHECK(nlap::kGauss4X[i] == -nlap::kGauss4X[3 - i]); // symmetric
    }
    CHECK(wsum == doctest::Approx(2.0).epsilon(1e-15));
    // exact through x^7 on [-1,1]: odd powers vanish, even ones hit 2/(d+1)
    for (int d = 0; d <= 7; ++d) {
        double s = 0.0;
        for (int i = 0; i < 4; ++i)
            s += nlap::kGauss4W[i] * std::pow(nlap::kGauss4X[i], d);
        double exact = (d % 2) ? 0.0 : 2.0 / (d + 1);
        CHECK(std::fabs(s - exact) < 1e-14);
    }
}

TEST_CASE("polynomials integrate exactly") {
    auto r = integrate_adaptive([](double x) { return x * x * x * x * x * x * x; },
                                0.0, 1.0, 1e-12);
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(1.0 / 8.0).epsilon(1e-14));
}

TEST_CASE("smooth transcendental integrands") {
    auto s = integrate_adaptive([](double x) { return std::sin(x); }, 0.0,
                                M_PI, 1e-13);
    CHECK(s.converged);
    CHECK(std::fabs(s.value - 2.0) < 1e-12);

    auto e = integrate_adaptive([](double x) { return std::exp(x); }, 0.0, 1.0,
                                1e-13);
    CHECK(std::fabs(e.value - (M_E - 1.0)) < 1e-12);
    CHECK(e.evals >= 15);
}

TEST_CASE("integrable endpoint singularity is bisected down") {
    // nodes are interior so 1/sqrt(x) never evaluates at 0
    auto r = integrate_adaptive([](double x) { return 1.0 / std::sqrt(x); },
                                0.0, 1.0, 1e-9, 1e-9, 100000);
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(2.0).epsilon(1e-7));
}

TEST_CASE("oscillatory integrand agrees with the Simpson oracle") {
    auto f = [](double x) { return std::cos(40.0 * x) * std::exp(-x); };
    auto r = integrate_adaptive(f, 0.0, 3.0, 1e-12);
    double ref = oracle::adaptive_simpson(f, 0.0, 3.0, 1e-13);
    CHECK(r.converged);
    CHECK(std::fabs(r.value - ref) < 1e-10);
}

TEST_CASE("error estimate is honest for converged panels") {
    auto f = [](double x) { return std::exp(-x * x); };
    auto r = integrate_adaptive(f, 0.0, 2.0, 1e-10);
    double ref = oracle::adaptive_simpson(f, 0.0, 2.0, 1e-14);
    CHECK(std::fabs(r.value - ref) <= 1e-9);
}

TEST_CASE("panel budget exhaustion throws with the achieved estimate") {
    bool threw = false;
    try {
        integrate_adaptive([](double x) { return std::sin(1.0 / (x + 1e-3)); },
                           0.0, 1.0, 1e-14, 1e-14, 4);
    } catch (const nlap::QuadratureError& e) {
        threw = true;
        CHECK(e.achieved_tolerance > 1e-14);
    }
    CHECK(threw);
}

TEST_CASE("degenerate interval integrates to zero") {
    auto r = integrate_adaptive([](double x) { return std::exp(x); }, 1.0, 1.0,
                                1e-12);
    CHECK(r.value == 0.0);
}

TEST_CASE("reversed orientation flips the sign") {
    auto fwd = integrate_adaptive([](double x) { return x * x; }, 0.0, 2.0, 1e-12);
    auto rev = integrate_adaptive([](double x) { return x * x; }, 2.0, 0.0, 1e-12);
    CHECK(fwd.value == doctest::Approx(-rev.value).epsilon(1e-13));
}
