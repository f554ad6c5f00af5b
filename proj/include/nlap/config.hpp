#ifndef NLAP_CONFIG_HPP
#define NLAP_CONFIG_HPP

#include "nlap/nonlinearity.hpp"
#include "nlap/thresholds.hpp"
#include "nlap/weights.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace nlap {

// One run, fully described by a flat dotted-key text file. Unknown keys are
// rejected at load; every window violation is reported with the invariant
// named. lambda is given either absolutely (problem.lambda) or as a fraction
// of the computed threshold (problem.lambda_frac); never both.
struct RunConfig {
    ProblemParams params;           // problem.*
    FKind f_kind = FKind::canonical;
    Weight weight;                  // weight.*

    double R = 8.0;                 // mesh.R
    int M = 400;                    // mesh.M
    double grading = 1.0;           // mesh.grading
    std::vector<double> R_list;     // mesh.R_list (exhaust)
    int nodes_per_unit = 50;        // mesh.nodes_per_unit (exhaust)

    double lambda = -1.0;           // problem.lambda, absolute
    double lambda_frac = -1.0;      // problem.lambda_frac, fraction of lambda*

    std::vector<long> k_list{10, 100, 1000, 10000}; // schedule.k

    std::vector<double> sweep_lambda;      // sweep.lambda (absolute)
    std::vector<double> sweep_lambda_frac; // sweep.lambda_frac

    double tol = 1e-9;              // solve.tol

    bool have_constants = false;    // all five constants.* present
    SolverConstants constants;
    int estimate_samples = 200;     // constants.samples

    double ledger_pbar_star = 0.0;  // ledger.pbar_star (0: dimension default)
    double ledger_ptilde = 0.0;     // ledger.ptilde    (0: dimension default)
    double ledger_R_star = 1.0;     // ledger.R_star
    double ledger_C_rho = 1.0;      // ledger.C_rho

    double thr_R = 1.0;             // threshold.R
    double thr_delta = 0.1;         // threshold.delta
    int thr_M = 200;                // threshold.M
    std::vector<double> thr_lambda; // threshold.lambda (grid, increasing)

    std::string out_dir = ".";      // output.dir
    std::uint64_t seed = 0;         // seed
};

// Parses "key = value" lines (# comments, blank lines allowed; lists are
// space-separated). Throws ParamError with the offending key or window named.
RunConfig parse_config(std::istream& is);
RunConfig load_config(const std::string& path);

// Dimension defaults for the ledger exponent pair (pbar_star, ptilde):
// N=2 -> (10, 4.5), N=3 -> (20, 6.5), otherwise (2N^2+2N, 2N+1/2).
void ledger_defaults(int N, double& pbar_star, double& ptilde);

} // namespace nlap

#endif
