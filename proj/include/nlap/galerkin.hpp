#ifndef NLAP_GALERKIN_HPP
#define NLAP_GALERKIN_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <memory>
#include <vector>

#include "nlap/brouwer.hpp"
#include "nlap/nonlinearity.hpp"
#include "nlap/radial_mesh.hpp"
#include "nlap/thresholds.hpp"
#include "nlap/weights.hpp"

namespace nlap {

// Discrete stand-in for the regularized problem on one ball: hat basis on the
// radial mesh, natural condition at the center, Dirichlet row at r = R. The
// dofs are the nodes 0..M-1; node M is pinned to zero.
struct GalerkinState {
    const RadialMesh* mesh = nullptr;
    const Nonlinearity* nl = nullptr;
    ProblemParams params;
    Weight weight;
    long reg_n = 1000;      // n of the phi/n forcing
    long strauss_k = 1000;  // k of the truncated nonlinearity; <= 0 means exact f
    GridFunction phi_aux;   // fixed positive forcing profile (default e^{-r})
    bool use_phi = true;    // drop the phi/n term entirely when false
    bool use_f = true;      // f-term on/off (the sublinear problem runs without it)

    int dofs() const { return mesh ? mesh->elements() : 0; }
};

// Nodal e^{-r} on the mesh, the default phi_aux.
GridFunction default_phi_aux(const RadialMesh& mesh);

struct SolveReport {
    GridFunction solution;
    double residual = 0.0;        // |F|_2 of the assembled system at return
    double w1n = 0.0;
    double sup = 0.0;             // max |u| (nodal; exact for hats)
    long iterations = 0;          // field evaluations spent in the zero search
    double certificate_min = 0.0; // min <F(xi),xi> over boundary samples
    double positivity_min = 0.0;  // min of u over nodes 0..M-1

    // Provenance of the run, echoed into CSV rows.
    double lambda = 0.0;
    double R = 0.0;
    long strauss_k = 0;
    long reg_n = 0;

    // Schedule diagnostics (solve_PD / ball_exhaustion). cauchy_trace holds
    // the raw gaps between successive regularized solutions (these carry the
    // O(1/n) forcing response); limit_trace holds the gaps between their
    // exact-system polishes, which is what convergence is declared on.
    bool schedule_converged = true;
    std::vector<double> cauchy_trace;
    std::vector<double> limit_trace;
};

// Piecewise view of f_k fitted once and reused across assembly calls: the
// middle branch k*int_s^{s+1/k} f is tabulated with exact Hermite derivative
// data k(f(s+1/k)-f(s)); the linear core and the plateau fall through to the
// Nonlinearity, as do arguments beyond the tabulated span.
class FkTable {
  public:
    FkTable(const Nonlinearity& nl, long k, double s_max, double rel_tol);
    double eval(double s) const; // s >= 0
    long k() const { return k_; }
    int nodes() const { return int(xs_.size()); }

  private:
    const Nonlinearity* nl_;
    long k_;
    double s_lo_ = 0.0, s_hi_ = 0.0;
    double inner_slope_ = 0.0;
    std::vector<double> xs_, ys_, ds_;
};

// Shared f_k tables keyed by k, reused across schedule steps and balls.
struct FkCache {
    std::map<long, std::shared_ptr<const FkTable>> by_k;
    std::shared_ptr<const FkTable> get(const Nonlinearity& nl, long k);
};

// Assembled residual of the Galerkin system tested against every hat:
//   F_j = int (|u'|^{N-2}u' w_j' + |u|^{N-2}u w_j - lambda a(r)(u+)^{q-1} w_j
//              - f_k(u+) w_j - phi w_j / n) omega r^{N-1} dr.
// One-shot convenience around the engine; overflow inside f_k propagates as
// RangeError.
Eigen::VectorXd assemble_F(const GalerkinState& state, const Eigen::VectorXd& xi);

// |xi|_m: the W^{1,N} norm of the hat expansion (the identification that
// makes the coefficient ball the function ball).
double galerkin_norm(const GalerkinState& state, const Eigen::VectorXd& xi);

// <F(xi), xi>: the energy pairing tested with u itself.
double dot_F_xi(const GalerkinState& state, const Eigen::VectorXd& xi);

// Solves the regularized system at fixed (k, n): boundary certificate on the
// |xi|_m-sphere of radius rho, then the zero search, then positivity and norm
// checks. Throws CertificateFailure when the boundary sampling dips negative
// (lambda too large or n too small), BudgetExhausted when the zero search
// fails.
SolveReport solve_PDn(const GalerkinState& state, double rho, double tol,
                      std::uint64_t seed = 0,
                      const std::vector<Eigen::VectorXd>& warm = {},
                      FkCache* cache = nullptr);

// Drives k = n over the schedule (default {10, 10^2, 10^3, 10^4}) with warm
// starts, declares convergence when consecutive solutions differ by < 1e-6
// relatively in W^{1,N}, then polishes against the exact-f system with the
// phi/n term dropped; the reported residual is the polished one. A
// certificate failure at an early step escalates n (the insufficient-n
// detection); at the last step it propagates. Schedule non-convergence is
// reported in the trace, not thrown.
SolveReport solve_PD(const GalerkinState& state, const SolverConstants& sc,
                     double tol, std::uint64_t seed = 0,
                     const std::vector<Eigen::VectorXd>& warm = {},
                     FkCache* cache = nullptr,
                     const std::vector<long>& schedule = {10, 100, 1000,
                                                          10000});

// Positive solution of -Delta_N u + |u|^{N-2} u = b (u+)^{q-1} on the mesh's
// ball: Picard sweeps on the concave right side with a Newton polish. Throws
// BudgetExhausted if the iteration collapses onto the trivial zero.
GridFunction solve_sublinear(double b, const RadialMesh& mesh, int N, double q,
                             double tol, std::uint64_t seed = 0);

// u2 >= u1 - tol at every node; meshes must agree node-for-node.
bool comparison_check(const GridFunction& u1, const GridFunction& u2, double tol);

struct ExhaustionReport {
    std::vector<std::unique_ptr<RadialMesh>> meshes; // per-ball storage the
                                                     // solutions point into
    std::vector<SolveReport> reports;   // one per radius
    std::vector<double> window_diffs;   // successive W^{1,N} gaps on B_{R0}
    std::vector<double> annulus_sups;   // sup over {m <= r <= m+1}, largest ball
    double rho_tilde = 0.0;             // min{(2 lambda K1)^{1/(N-q)}, rho}
    bool norms_ok = false;              // every w1n <= rho_tilde (+ slack)
};

// Solves on each B_R of the increasing R_list (meshes scale with R), extends
// by zero, warm-starts each ball from the previous solution, and reports the
// uniform norm bound plus decay diagnostics.
ExhaustionReport ball_exhaustion(const GalerkinState& proto,
                                 const SolverConstants& sc,
                                 const std::vector<double>& R_list, double tol,
                                 double nodes_per_unit = 50.0,
                                 std::uint64_t seed = 0,
                                 FkCache* cache = nullptr);

// Samples 200 deterministic profiles (smooth cosine packets, single-node
// spikes, log concentration bumps, decaying products) on the mesh, normalizes
// each to unit W^{1,N} norm, and takes the sup of the relevant ratios:
//   K1      sup int a (v+)^q            (Hoelder/embedding constant)
//   K3      sup int phi |v|
//   C_alphaN sup (int phi_N(alpha_N |v|^{N'}))^{1/N'}
//   K2      sup int C1 (s0 v+)^p phi_N(2^{N'} alpha (s0 v+)^{N'}) / (C_alphaN s0^p)
//           at the Trudinger-Moser calibration scale s0 = (1/4)(alpha_N/(N alpha))^{(N-1)/N}
//   C_star  sup |v|_{L^{pbar}} / |v|_{W^{1,N}}
// Heuristic lower bounds of the true constants; rho, lambda*, varsigma are
// derived from them. Samples that overflow the exponential are skipped.
SolverConstants estimate_constants(const RadialMesh& mesh, const Nonlinearity& nl,
                                   const ProblemParams& params,
                                   const Weight& weight,
                                   const GridFunction& phi_aux,
                                   double pbar_star = 10.0, int samples = 200,
                                   std::uint64_t seed = 0);

} // namespace nlap

#endif
