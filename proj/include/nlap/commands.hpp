#ifndef NLAP_COMMANDS_HPP
#define NLAP_COMMANDS_HPP

#include "nlap/apriori.hpp"
#include "nlap/config.hpp"
#include "nlap/galerkin.hpp"

#include <memory>
#include <string>

namespace nlap {

// Everything a command needs once the config is resolved: mesh and
// nonlinearity, constants (estimated on the mesh unless the config supplies
// them), lambda resolved from problem.lambda or problem.lambda_frac, and the
// Moser ledger at the configured exponent pair.
struct RunContext {
    RunConfig cfg;
    std::unique_ptr<RadialMesh> mesh;
    std::unique_ptr<Nonlinearity> nl;
    GridFunction phi;
    SolverConstants sc; // varsigma evaluated at the resolved lambda
    MoserLedger ledger;
    double lambda = -1.0; // -1 when the config names none
};

RunContext make_context(const RunConfig& cfg, bool need_lambda);

// Subcommand bodies. Each writes its artifacts under cfg.out_dir and throws
// on failure; solver failures (certificate, budget) additionally leave a
// key-value error record error.txt next to the CSVs.
void cmd_solve(const RunConfig& cfg);
void cmd_sweep_lambda(const RunConfig& cfg);
void cmd_threshold(const RunConfig& cfg);
void cmd_exhaust(const RunConfig& cfg);
void cmd_check_fk(const RunConfig& cfg);
void cmd_eigen(const RunConfig& cfg);

// Argument parsing plus the exit-code contract: 0 success, 2 config error,
// 3 certificate failure, 4 search-budget failure, 1 anything else.
int run_cli(int argc, const char* const* argv);

} // namespace nlap

#endif
