#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nlap/errors.hpp"
#include "nlap/weights.hpp"

#include <cmath>
#include <string>

using namespace nlap;

TEST_CASE("evaluation formulas per kind") {
    Weight w;
    w.kind = WeightKind::power_decay;
    w.gamma_or_rate = 2.0;
    w.amplitude = 3.0;
    CHECK(weight_eval(w, 0.0) == 3.0);
    CHECK(weight_eval(w, 1.0) == doctest::Approx(0.75).epsilon(1e-15));

    w.kind = WeightKind::exponential;
    w.gamma_or_rate = 1.5;
    w.amplitude = 1.0;
    CHECK(weight_eval(w, 2.0) == doctest::Approx(std::exp(-3.0)).epsilon(1e-15));

    w.kind = WeightKind::constant_on_ball;
    w.gamma_or_rate = 2.0;
    w.amplitude = 5.0;
    CHECK(weight_eval(w, 0.3) == 5.0);
    CHECK(weight_eval(w, 1.0) == 5.0); // plateau edge
    CHECK(weight_eval(w, 1.5) == doctest::Approx(5.0 * std::exp(-1.0)).epsilon(1e-15));
}

TEST_CASE("kind names round-trip") {
    for (const char* n : {"power-decay", "exponential", "constant-on-ball"})
        CHECK(to_string(weight_kind_from_string(n)) == n);
    CHECK_THROWS_AS(weight_kind_from_string("gaussian"), ParamError);
}

TEST_CASE("integrability window is checked and named") {
    Weight w;
    w.kind = WeightKind::power_decay;
    w.amplitude = 1.0;
    w.gamma_or_rate = 0.5; // exactly N - q for N=2, q=1.5: inadmissible
    try {
        validate_weight(w, 2, 1.5);
        CHECK(false);
    } catch (const ParamError& e) {
        CHECK(std::string(e.what()).find("gamma") != std::string::npos);
    }
    w.gamma_or_rate = 0.51;
    CHECK_NOTHROW(validate_weight(w, 2, 1.5));

    w.kind = WeightKind::exponential;
    w.gamma_or_rate = -1.0;
    CHECK_THROWS_AS(validate_weight(w, 2, 1.5), ParamError);
    w.gamma_or_rate = 1.0;
    w.amplitude = 0.0;
    CHECK_THROWS_AS(validate_weight(w, 2, 1.5), ParamError);
}

TEST_CASE("ball infimum equals the boundary value for nonincreasing kinds") {
    Weight w;
    w.kind = WeightKind::exponential;
    w.gamma_or_rate = 2.0;
    w.amplitude = 1.0;
    for (double R : {0.5, 1.0, 8.0})
        CHECK(weight_inf_on_ball(w, R) == doctest::Approx(std::exp(-2.0 * R)).epsilon(1e-15));
    // the mesh scan can only sit at or above the true infimum
    CHECK(weight_grid_min(w, 8.0, 64) >= weight_inf_on_ball(w, 8.0));
    CHECK(weight_grid_min(w, 8.0, 64) == doctest::Approx(weight_inf_on_ball(w, 8.0)).epsilon(1e-12));
}

TEST_CASE("L^{N/(N-q)} norm against closed forms, N=2 q=1.5") {
    // exponent N/(N-q) = 4, prefactor omega_1 = 2 pi, outer power (N-q)/N = 1/4
    Weight w;
    w.kind = WeightKind::exponential;
    w.gamma_or_rate = 1.0;
    w.amplitude = 1.0;
    // int_0^inf e^{-4r} r dr = 1/16  ->  (2 pi / 16)^{1/4}
    CHECK(weight_lnq_norm(w, 2, 1.5) ==
          doctest::Approx(std::pow(M_PI / 8.0, 0.25)).epsilon(1e-10));

    w.kind = WeightKind::power_decay;
    w.gamma_or_rate = 2.0;
    // int_0^inf (1+r)^{-8} r dr = 1/42  ->  (2 pi / 42)^{1/4}
    CHECK(weight_lnq_norm(w, 2, 1.5) ==
          doctest::Approx(std::pow(M_PI / 21.0, 0.25)).epsilon(1e-10));

    // amplitude scales the norm linearly
    w.amplitude = 2.0;
    CHECK(weight_lnq_norm(w, 2, 1.5) ==
          doctest::Approx(2.0 * std::pow(M_PI / 21.0, 0.25)).epsilon(1e-10));
}

TEST_CASE("norm is finite and positive across kinds and dimensions") {
    for (int N : {2, 3}) {
        double q = 1.5;
        Weight w;
        w.kind = WeightKind::constant_on_ball;
        w.gamma_or_rate = 1.0;
        w.amplitude = 1.0;
        double v = weight_lnq_norm(w, N, q);
        CHECK(v > 0.0);
        CHECK(std::isfinite(v));
    }
}
