#ifndef NLAP_APRIORI_HPP
#define NLAP_APRIORI_HPP

#include <string>

namespace nlap {

// Inputs the iteration ledger cannot derive on its own: the generic section-5
// constant, the weighted-term budget A = lambda* |a|_{L^{N/(N-q)}}, and the
// window radius of the iteration.
struct LedgerAux {
    double C_rho = 1.0;
    double A = 0.0;
    double R_star = 1.0;
};

// Arithmetic over the Moser-iteration constants: exponent ladder beta_n with
// N + beta_{n+1} = (N + beta_n)/P, series sums S1..S3, the tail product
// Q_inf, and the derived sup/decay prefactors. The iteration itself never
// runs; discrete solutions are already bounded, so the ledger only prices
// the bounds.
struct MoserLedger {
    int N = 2;
    double pbar_star = 0.0; // > 2 N^2
    double ptilde = 0.0;    // in (2N, pbar_star/N)
    double beta0 = 0.0;     // pbar_star/ptilde - N
    double P = 0.0;         // ptilde N / pbar_star, in (0,1)
    double S1 = 0.0;        // 1/((N+beta0)(1-P))
    double S2 = 0.0;        // ln prod (N+beta_n)^{N/(N+beta_n)}
    double S3 = 0.0;        // ln prod (C0+D_n)^{1/(N+beta_n)}
    double Q_inf = 0.0;     // prod_{k>=2} (1-P^k)^{-1}
    double C_star = 0.0;    // embedding constant into L^{pbar_star}
    double B0 = 0.0;        // 1 + |B(0, 2 R_star)|
    double C0 = 0.0;        // C_rho + A + 1
    double Cprime = 0.0;    // (N^N 2^{2N-1} + 2^{N-1}) / R_star^N
    double Theta = 0.0;     // beta0 / ((N+beta0) Q_inf), in (0,1)

    // Geometric remainders folded into S2/S3 after truncation (interval
    // widths; both sums carry their full tails, so the stored values are
    // upper evaluations).
    double s2_tail = 0.0;
    double s3_tail = 0.0;
};

// Fills every field; series are summed until the running term drops below
// 1e-14 and the exact geometric remainder (S2) or its upper bound (S3) is
// folded in. Q_inf multiplies partial products until a factor is within
// 1e-15 of 1. Parameter-window violations throw ParamError.
MoserLedger build_ledger(int N, double pbar_star, double ptilde, double C_star,
                         const LedgerAux& aux = {});

// C^{S1} e^{S2} e^{S3} max{1, C_star * w1n_norm_value},
// C = 2^N (C_star + 1)^N B0.
double sup_bound(const MoserLedger& ledger, double w1n_norm_value);

// (N S1 S2)^{1/(N+beta0)} * input^{beta0/((N+beta0) Q_inf)}.
double decay_bound(const MoserLedger& ledger, double lp_norm_on_annulus);

// Theta = beta0 / ((N+beta0) Q_inf).
double theta_exponent(const MoserLedger& ledger);

// One "key value" line per field, %.17g, declaration order.
std::string ledger_report(const MoserLedger& ledger);

} // namespace nlap

#endif
