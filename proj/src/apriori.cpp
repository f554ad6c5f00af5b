#include "nlap/apriori.hpp"

#include "nlap/errors.hpp"
#include "nlap/radial_mesh.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace nlap {

namespace {

constexpr double kTermFloor = 1e-14;

// sum_{n>=n0} P^n (a + b n) = P^{n0} [ (a + b n0)/(1-P) + b P/(1-P)^2 ].
double geometric_linear_tail(double P, double a, double b, long n0) {
    double head = std::pow(P, double(n0));
    return head * ((a + b * double(n0)) / (1.0 - P) + b * P / ((1.0 - P) * (1.0 - P)));
}

} // namespace

MoserLedger build_ledger(int N, double pbar_star, double ptilde, double C_star,
                         const LedgerAux& aux) {
    if (N < 2)
        throw ParamError("build_ledger: dimension N >= 2 violated");
    double NN = double(N);
    if (!(pbar_star > 2.0 * NN * NN))
        throw ParamError("build_ledger: pbar_star > 2 N^2 violated");
    if (!(ptilde > 2.0 * NN) || !(ptilde < pbar_star / NN))
        throw ParamError("build_ledger: ptilde in (2N, pbar_star/N) violated");
    if (!(C_star > 0.0) || !std::isfinite(C_star))
        throw ParamError("build_ledger: C_star > 0 violated");
    if (!(aux.C_rho > 0.0) || !std::isfinite(aux.C_rho))
        throw ParamError("build_ledger: aux C_rho > 0 violated");
    if (!(aux.A >= 0.0) || !std::isfinite(aux.A))
        throw ParamError("build_ledger: aux A >= 0 violated");
    if (!(aux.R_star > 0.0) || !std::isfinite(aux.R_star))
        throw ParamError("build_ledger: aux R_star > 0 violated");

    MoserLedger led;
    led.N = N;
    led.pbar_star = pbar_star;
    led.ptilde = ptilde;
    led.C_star = C_star;

    led.beta0 = pbar_star / ptilde - NN;
    led.P = ptilde * NN / pbar_star; // < 1 by the ptilde window
    double Nb = NN + led.beta0;

    led.B0 = 1.0 + sphere_area(N) * std::pow(2.0 * aux.R_star, NN) / NN;
    led.C0 = aux.C_rho + aux.A + 1.0;
    led.Cprime = (std::pow(NN, NN) * std::pow(2.0, 2.0 * NN - 1.0) +
                  std::pow(2.0, NN - 1.0)) /
                 std::pow(aux.R_star, NN);

    led.S1 = 1.0 / (Nb * (1.0 - led.P));

    // S2 = (N/(N+beta0)) sum_n P^n (ln(N+beta0) + n ln(1/P)).
    // N + beta_n = (N + beta0) P^{-n}, so ln(N+beta_n) splits linearly in n
    // and the truncation remainder has the exact closed form above.
    {
        double a = std::log(Nb);
        double b = std::log(1.0 / led.P);
        double scale = NN / Nb;
        double sum = 0.0;
        long n = 0;
        for (; n < 2000000; ++n) {
            double term = std::pow(led.P, double(n)) * (a + b * double(n));
            if (n > 0 && term < kTermFloor)
                break;
            sum += term;
        }
        double tail = geometric_linear_tail(led.P, a, b, n);
        led.S2 = scale * (sum + tail);
        led.s2_tail = scale * tail;
    }

    // S3 = sum_n P^n ln(C0 + D_n) / (N+beta0), D_n = Cprime 2^{N(n+1)}.
    // ln(C0+D_n) is evaluated in log space (D_n overflows long before the
    // P^n factor kills the term); the remainder uses
    // ln(C0+D_n) <= ln(C0+Cprime) + N(n+1) ln 2.
    {
        double lnC = std::log(led.Cprime);
        double ln2N = NN * std::log(2.0);
        double sum = 0.0;
        long n = 0;
        for (; n < 2000000; ++n) {
            double lnD = lnC + ln2N * double(n + 1);
            double lnterm = lnD + std::log1p(led.C0 * std::exp(-lnD));
            double term = std::pow(led.P, double(n)) * lnterm / Nb;
            if (n > 0 && term < kTermFloor)
                break;
            sum += term;
        }
        double a = std::log(led.C0 + led.Cprime) + ln2N;
        double tail = geometric_linear_tail(led.P, a, ln2N, n) / Nb;
        led.S3 = sum + tail;
        led.s3_tail = tail;
    }

    // Q_inf = prod_{k>=2} (1-P^k)^{-1}. Factors are multiplied until one is
    // within 1e-15 of 1; if P is close enough to 1 to exhaust the cap, the
    // remaining log-sum is bounded by sum 2 P^k and folded in, keeping the
    // stored value an upper evaluation.
    {
        double lnQ = 0.0;
        double Pk = led.P * led.P;
        long k = 2;
        for (; k < 2000000; ++k) {
            if (Pk < 1e-15)
                break;
            lnQ -= std::log1p(-Pk);
            Pk *= led.P;
        }
        if (Pk >= 1e-15)
            lnQ += 2.0 * Pk / (1.0 - led.P);
        led.Q_inf = std::exp(lnQ);
    }

    led.Theta = led.beta0 / (Nb * led.Q_inf);
    return led;
}

double sup_bound(const MoserLedger& led, double w1n_norm_value) {
    if (!(w1n_norm_value >= 0.0))
        throw ParamError("sup_bound: norm argument >= 0 violated");
    double NN = double(led.N);
    double C = std::pow(2.0, NN) * std::pow(led.C_star + 1.0, NN) * led.B0;
    return std::pow(C, led.S1) * std::exp(led.S2) * std::exp(led.S3) *
           std::max(1.0, led.C_star * w1n_norm_value);
}

double decay_bound(const MoserLedger& led, double lp_norm_on_annulus) {
    if (!(lp_norm_on_annulus >= 0.0))
        throw ParamError("decay_bound: norm argument >= 0 violated");
    double Nb = double(led.N) + led.beta0;
    double pref = std::pow(double(led.N) * led.S1 * led.S2, 1.0 / Nb);
    return pref * std::pow(lp_norm_on_annulus, led.Theta);
}

double theta_exponent(const MoserLedger& led) { return led.Theta; }

std::string ledger_report(const MoserLedger& led) {
    std::ostringstream os;
    char buf[64];
    auto put = [&](const char* key, double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << key << ' ' << buf << '\n';
    };
    os << "N " << led.N << '\n';
    put("pbar_star", led.pbar_star);
    put("ptilde", led.ptilde);
    put("beta0", led.beta0);
    put("P", led.P);
    put("S1", led.S1);
    put("S2", led.S2);
    put("S3", led.S3);
    put("Q_inf", led.Q_inf);
    put("C_star", led.C_star);
    put("B0", led.B0);
    put("C0", led.C0);
    put("Cprime", led.Cprime);
    put("Theta", led.Theta);
    put("s2_tail", led.s2_tail);
    put("s3_tail", led.s3_tail);
    return os.str();
}

} // namespace nlap
