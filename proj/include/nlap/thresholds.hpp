#ifndef NLAP_THRESHOLDS_HPP
#define NLAP_THRESHOLDS_HPP

#include "nlap/nonlinearity.hpp"
#include "nlap/radial_mesh.hpp"
#include "nlap/weights.hpp"

#include <cstdint>
#include <utility>

namespace nlap {

// Constants of the existence window. K1, K2, K3, C_alphaN, C_star are inputs
// (estimated elsewhere or supplied); rho, varsigma, lambda_star derive from
// them:
//   rho     = min{ (2 K2 C(alpha,N))^{-1/(p-N)},
//                  (1/4) (alpha_N / (N alpha))^{(N-1)/N} }
//   lambda* = rho^{N-q} / (4 K1)
//   sigma   = rho^N / 2 - lambda K1 rho^q   (> rho^N/4 whenever lambda < lambda*)
struct SolverConstants {
    double K1 = 1.0;
    double K2 = 1.0;
    double K3 = 1.0;
    double C_alphaN = 1.0;
    double C_star = 1.0;

    double rho = 0.0;
    double varsigma = 0.0;
    double lambda_star = 0.0;
};

// Fills the derived fields from the supplied ones. varsigma uses
// params.lambda; with lambda = 0 it is simply rho^N/2.
SolverConstants compute_rho_lambda_star(const ProblemParams& params,
                                        SolverConstants in);

// H(t) = phi_N(a t^{N'}) (p-N) t^{p-q}
//      + alpha N/(N-1) t^{p-q+N/(N-1)} phi_{N-1}(a t^{N'}),  a = alpha.
// Strictly increasing, H(0) = 0. Overflow of the exponential -> RangeError.
double H_eval(double t, const ProblemParams& params);

// Unique t1 > 0 with H(t1) = Lambda (N-q): doubling bracket, then bisection
// until |H(t1) - Lambda(N-q)| <= tol. Throws RangeError if no bracket exists
// below the overflow bound, BudgetExhausted if the floating-point resolution
// floor of H near t1 sits above tol.
double solve_t1(double Lambda, const ProblemParams& params, double tol);

// Q(t1) with Q(t) = P1(t) t^{-(N-1)}, P1(t) = Lambda t^{q-1}
// + t^{p-1} phi_N(alpha t^{N'}); at t1 this is the global minimum of Q.
double C_Lambda_eval(double t1, double Lambda, const ProblemParams& params);

// Principal eigenvalue of -Delta_N on the mesh's ball with zero boundary
// values: minimizes int |u'|^N r^{N-1} / int |u|^N r^{N-1} by projected
// gradient descent (Barzilai-Borwein steps, Armijo backtracking, 5 seeded
// restarts). Returns (sigma1, eigenfunction with sup = 1, positive).
// Throws BudgetExhausted when every restart stagnates above tol.
std::pair<double, GridFunction> principal_eigenvalue(const RadialMesh& mesh,
                                                     double tol,
                                                     std::uint64_t seed = 0);

struct NonexistenceReport {
    double lambda = 0.0;
    double a_R = 0.0;
    double Lambda = 0.0; // lambda * a_R
    double t1 = 0.0;
    double C_Lambda = 0.0;
    double sigma1 = 0.0;
    double delta = 0.0;
    bool certified = false; // C_Lambda >= sigma1 + delta + 1
};

// Certificate data for ruling out positive solutions at this lambda
// (canonical f). sigma1_hint > 0 skips the eigenvalue solve (sweeps reuse
// one mesh); pass 0 to compute it here.
NonexistenceReport nonexistence_certificate(double lambda, double R,
                                            double delta,
                                            const RadialMesh& mesh,
                                            const ProblemParams& params,
                                            const Weight& weight,
                                            double sigma1_hint = 0.0);

} // namespace nlap

#endif
