#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nlap/errors.hpp"
#include "nlap/nonlinearity.hpp"

#include "oracles.hpp"

#include <cmath>
#include <string>
#include <vector>

using namespace nlap;

namespace {
ProblemParams baseline() {
    ProblemParams p;
    p.N = 2; p.p = 4.0; p.q = 1.5; p.alpha = 1.0; p.a1 = 1.0;
    return p;
}
} // namespace

TEST_CASE("parameter windows are enforced by name") {
    ProblemParams p = baseline();
    CHECK_NOTHROW(validate_params(p));

    p.q = 2.5; // q >= N
    try {
        validate_params(p);
        CHECK(false);
    } catch (const ParamError& e) {
        CHECK(std::string(e.what()).find("1<q<N") != std::string::npos);
    }

    p = baseline(); p.p = 2.0; // p <= N
    CHECK_THROWS_AS(validate_params(p), ParamError);
    p = baseline(); p.alpha = 0.0;
    CHECK_THROWS_AS(validate_params(p), ParamError);
    p = baseline(); p.a1 = -1.0;
    CHECK_THROWS_AS(validate_params(p), ParamError);
    p = baseline(); p.N = 1;
    CHECK_THROWS_AS(validate_params(p), ParamError);
}

TEST_CASE("conjugate exponent") {
    ProblemParams p = baseline();
    CHECK(p.conjugate() == 2.0);
    p.N = 3;
    CHECK(p.conjugate() == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("phi_n removes exactly the leading Taylor terms") {
    CHECK(phi_n(2, 1.0) == doctest::Approx(M_E - 1.0).epsilon(1e-15));
    CHECK(phi_n(3, 1.0) == doctest::Approx(M_E - 2.0).epsilon(1e-14));
    CHECK(phi_n(2, 0.0) == 0.0);
    CHECK(phi_n(0, 1.0) == doctest::Approx(M_E).epsilon(1e-15)); // empty sum
    CHECK(phi_n(1, 1.0) == doctest::Approx(M_E).epsilon(1e-15));

    // tail series beats naive cancellation: leading term t^{n-1}/(n-1)!
    double t = 1e-3;
    double lead = std::pow(t, 9) / 362880.0; // 9!
    double v = phi_n(10, t);
    CHECK(v == doctest::Approx(lead).epsilon(1e-3));
    CHECK(v > lead); // series has positive remainder

    CHECK_THROWS_AS(phi_n(2, -0.5), DomainError);
    CHECK_THROWS_AS(phi_n(2, 800.0), RangeError);
}

TEST_CASE("log_phi_n extends past the overflow ceiling") {
    // phi_2(t) = e^t - 1, log ~ t for large t
    CHECK(log_phi_n(2, 1000.0) == doctest::Approx(1000.0).epsilon(1e-12));
    for (double t : {0.5, 2.0, 20.0})
        CHECK(std::exp(log_phi_n(3, t)) == doctest::Approx(phi_n(3, t)).epsilon(1e-12));
}

TEST_CASE("canonical f matches its closed form at N=2 p=4 alpha=1") {
    Nonlinearity nl(FKind::canonical, baseline());
    // f(s) = |s|^{p-2} s phi_N(alpha |s|^{N'}) = s^3 (e^{s^2} - 1)
    CHECK(nl.f(1.0) == doctest::Approx(M_E - 1.0).epsilon(1e-15));
    CHECK(nl.f(0.0) == 0.0);
    for (double s : {0.3, 0.9, 2.0, 5.0}) {
        double ref = s * s * s * (std::exp(s * s) - 1.0);
        CHECK(nl.f(s) == doctest::Approx(ref).epsilon(1e-14));
        CHECK(nl.f(-s) == doctest::Approx(-ref).epsilon(1e-14)); // odd
    }
}

TEST_CASE("primitive agrees with the closed form and the Simpson oracle") {
    Nonlinearity nl(FKind::canonical, baseline());
    CHECK(nl.G(1.0) == doctest::Approx(0.25).epsilon(1e-12));
    for (double t : {0.5, 1.0, 2.0}) {
        CHECK(nl.G(t) == doctest::Approx(oracle::G_closed_n2p4(t)).epsilon(1e-11));
        double simp = oracle::adaptive_simpson([&](double s) { return nl.f(s); },
                                               0.0, t, 1e-13);
        CHECK(nl.G(t) == doctest::Approx(simp).epsilon(1e-10));
    }
    // G is even (f odd), and the cache returns identical repeats
    CHECK(nl.G(-1.3) == doctest::Approx(nl.G(1.3)).epsilon(1e-12));
    CHECK(nl.G(0.7) == nl.G(0.7));
}

TEST_CASE("fk converges to f on compacts and keeps the sign condition") {
    Nonlinearity nl(FKind::canonical, baseline());
    // on |s| <= 1 the k = 10^4 truncation is within 1e-3 of f
    double worst = 0.0;
    for (double s = -1.0; s <= 1.0 + 1e-12; s += 0.01)
        worst = std::max(worst, std::fabs(nl.fk(10000, s) - nl.f(s)));
    CHECK(worst <= 1e-3);
    CHECK(worst > 0.0); // it is an approximation, not an alias

    for (double s = -3.0; s <= 3.0; s += 0.17)
        CHECK(s * nl.fk(50, s) >= 0.0);
}

TEST_CASE("fk plateau branch is constant beyond |s| = k") {
    Nonlinearity nl(FKind::canonical, baseline());
    double at_k = nl.fk(5, 5.0);
    CHECK(nl.fk(5, 7.0) == at_k);
    CHECK(nl.fk(5, 100.0) == at_k);
    CHECK(nl.fk(5, -7.0) == -nl.fk(5, 7.0)); // odd family
}

TEST_CASE("envelope branches and the documented constants") {
    ProblemParams p = baseline();
    Nonlinearity nl(FKind::canonical, p);
    double C1 = p.a1 * std::pow(2.0, p.p);
    double C2 = p.a1 * std::pow(2.0, p.p - 1.0) *
                std::exp(std::pow(2.0, p.conjugate()) * p.alpha);

    EnvelopeValue inner = nl.envelope(100, 0.005);
    CHECK(inner.branch == EnvelopeBranch::inner);
    CHECK(inner.bound == doctest::Approx(C2 * 1e-4 * 2.5e-5).epsilon(1e-12));
    CHECK(inner.bound == doctest::Approx(1.09196300066288e-06).epsilon(1e-11));

    EnvelopeValue outer = nl.envelope(100, 2.0);
    CHECK(outer.branch == EnvelopeBranch::outer);
    double ref = C1 * 16.0 * phi_n(2, std::pow(2.0, p.conjugate()) * 4.0);
    CHECK(outer.bound == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("envelope_holds over a spot grid, including overflow territory") {
    Nonlinearity nl(FKind::canonical, baseline());
    for (long k : {1L, 2L, 10L, 100L})
        for (double s = -20.0; s <= 20.0; s += 0.37)
            CHECK(nl.envelope_holds(k, s));
    CHECK(nl.envelope_holds(3, 20.0)); // envelope itself overflows, log space
}

TEST_CASE("growth bound on the canonical family saturates but never breaks") {
    Nonlinearity nl(FKind::canonical, baseline());
    std::vector<double> grid;
    for (double t = -20.0; t <= 20.0 + 1e-9; t += 0.1) grid.push_back(t);
    GrowthReport rep = nl.check_growth(grid);
    CHECK(rep.passed());
    CHECK(rep.max_ratio <= 1.0 + 1e-12);
    CHECK(rep.max_ratio > 0.99); // canonical f sits on the bound
}

TEST_CASE("modulated kinds satisfy the same growth window") {
    std::vector<double> grid;
    for (double t = -10.0; t <= 10.0 + 1e-9; t += 0.05) grid.push_back(t);
    for (FKind kind : {FKind::sine_modulated, FKind::positive_part_sine}) {
        Nonlinearity nl(kind, baseline());
        GrowthReport rep = nl.check_growth(grid);
        CHECK(rep.passed());
        CHECK(rep.max_ratio <= 1.0 + 1e-12);
    }
}

TEST_CASE("kind names round-trip") {
    for (const char* name : {"canonical", "sine-modulated",
                             "positive-part-sine", "custom-tabulated"})
        CHECK(to_string(fkind_from_string(name)) == name);
    CHECK_THROWS_AS(fkind_from_string("no_such_kind"), ParamError);
}

TEST_CASE("tabulated nonlinearity: monotone interpolation inside, constant outside") {
    ProblemParams p = baseline();
    Nonlinearity nl(p, {-1.0, 0.0, 1.0}, {-1.0, 0.0, 1.0});
    CHECK(nl.f(0.0) == 0.0);
    double mid = nl.f(0.5);
    CHECK(mid > 0.0);
    CHECK(mid < 1.0);
    CHECK(nl.f(5.0) == nl.f(1.0));   // constant beyond the last sample
    CHECK(nl.f(-5.0) == nl.f(-1.0));

    // sample validation: missing origin, sign violation, unsorted t
    CHECK_THROWS_AS(Nonlinearity(p, {-1.0, 1.0}, {-1.0, 1.0}), ParamError);
    CHECK_THROWS_AS(Nonlinearity(p, {-1.0, 0.0, 1.0}, {1.0, 0.0, 1.0}), ParamError);
    CHECK_THROWS_AS(Nonlinearity(p, {0.0, 1.0, 0.5}, {0.0, 1.0, 0.5}), ParamError);
}
