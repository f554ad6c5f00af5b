#include "nlap/commands.hpp"

#include "nlap/errors.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace nlap {

namespace {

constexpr const char* kVersion = "# nlap-galerkin v0.1.0";

std::string fmt(double v) {
    char b[40];
    std::snprintf(b, sizeof b, "%.17g", v);
    return b;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
    ensure_dir(dir);
    std::filesystem::path p = std::filesystem::path(dir) / name;
    std::ofstream os(p);
    if (!os)
        throw ParamError("output: cannot write '" + p.string() + "'");
    return os;
}

void write_error_record(const std::string& dir, const char* kind,
                        const std::string& msg, double value) {
    std::ofstream os = open_out(dir, "error.txt");
    os << "kind " << kind << '\n';
    os << "message " << msg << '\n';
    os << "value " << fmt(value) << '\n';
}

// Lambda-decay envelope min{(2 lambda K1)^{1/(N-q)}, rho};
// at lambda = 0 the concave term is gone and only the a-priori radius binds.
double norm_bound(double lambda, const SolverConstants& sc,
                  const ProblemParams& p) {
    if (lambda <= 0.0) return sc.rho;
    double b = std::pow(2.0 * lambda * sc.K1, 1.0 / (double(p.N) - p.q));
    return std::min(b, sc.rho);
}

GalerkinState state_of(const RunContext& ctx) {
    GalerkinState st;
    st.mesh = ctx.mesh.get();
    st.nl = ctx.nl.get();
    st.params = ctx.cfg.params;
    st.params.lambda = std::max(ctx.lambda, 0.0);
    st.weight = ctx.cfg.weight;
    st.phi_aux = ctx.phi;
    return st;
}

Eigen::VectorXd coeffs(const GridFunction& u) {
    Eigen::VectorXd x(Eigen::Index(u.values.size()) - 1);
    for (Eigen::Index j = 0; j < x.size(); ++j)
        x[j] = u.values[std::size_t(j)];
    return x;
}

void dump_constants(std::ostream& os, const RunContext& ctx) {
    os << "K1 " << fmt(ctx.sc.K1) << '\n';
    os << "K2 " << fmt(ctx.sc.K2) << '\n';
    os << "K3 " << fmt(ctx.sc.K3) << '\n';
    os << "C_alphaN " << fmt(ctx.sc.C_alphaN) << '\n';
    os << "C_star " << fmt(ctx.sc.C_star) << '\n';
    os << "rho " << fmt(ctx.sc.rho) << '\n';
    os << "varsigma " << fmt(ctx.sc.varsigma) << '\n';
    os << "lambda_star " << fmt(ctx.sc.lambda_star) << '\n';
    os << "lambda " << fmt(std::max(ctx.lambda, 0.0)) << '\n';
}

} // namespace

RunContext make_context(const RunConfig& cfg, bool need_lambda) {
    RunContext ctx;
    ctx.cfg = cfg;
    ctx.mesh = std::make_unique<RadialMesh>(
        build_mesh(cfg.R, cfg.M, cfg.params.N, cfg.grading));
    ctx.nl = std::make_unique<Nonlinearity>(cfg.f_kind, cfg.params);
    ctx.phi = default_phi_aux(*ctx.mesh);

    double pbar = cfg.ledger_pbar_star, pt = cfg.ledger_ptilde;
    if (pbar == 0.0) ledger_defaults(cfg.params.N, pbar, pt);

    ProblemParams pp = cfg.params;
    pp.lambda = 0.0;
    if (cfg.have_constants)
        ctx.sc = compute_rho_lambda_star(pp, cfg.constants);
    else
        ctx.sc = estimate_constants(*ctx.mesh, *ctx.nl, pp, cfg.weight, ctx.phi,
                                    pbar, cfg.estimate_samples, cfg.seed);

    if (cfg.lambda_frac > 0.0)
        ctx.lambda = cfg.lambda_frac * ctx.sc.lambda_star;
    else if (cfg.lambda >= 0.0)
        ctx.lambda = cfg.lambda;
    else if (need_lambda)
        throw ParamError(
            "config: problem.lambda or problem.lambda_frac required for this "
            "command");
    if (ctx.lambda >= 0.0) {
        pp.lambda = ctx.lambda;
        ctx.sc = compute_rho_lambda_star(pp, ctx.sc); // varsigma at lambda
    }

    LedgerAux aux;
    aux.C_rho = cfg.ledger_C_rho;
    aux.A = ctx.sc.lambda_star *
            weight_lnq_norm(cfg.weight, cfg.params.N, cfg.params.q);
    aux.R_star = cfg.ledger_R_star;
    ctx.ledger = build_ledger(cfg.params.N, pbar, pt, ctx.sc.C_star, aux);
    return ctx;
}

void cmd_solve(const RunConfig& cfg) {
    ensure_dir(cfg.out_dir);
    RunContext ctx = make_context(cfg, true);
    GalerkinState st = state_of(ctx);
    try {
        SolveReport rep;
        if (ctx.lambda < ctx.sc.lambda_star) {
            rep = solve_PD(st, ctx.sc, cfg.tol, cfg.seed, {}, nullptr,
                           cfg.k_list);
        } else if (ctx.sc.varsigma > 0.0) {
            // Beyond the guaranteed window but the certificate margin is
            // still positive: one run at the last schedule step, certificate
            // sampling deciding honestly.
            st.strauss_k = cfg.k_list.back();
            st.reg_n = cfg.k_list.back();
            rep = solve_PDn(st, ctx.sc.rho, cfg.tol, cfg.seed);
        } else {
            throw CertificateFailure(
                "cmd_solve: certificate margin varsigma <= 0 at lambda = " +
                    fmt(ctx.lambda) + " (lambda >= 2 lambda_star)",
                ctx.sc.varsigma);
        }

        write_grid_csv(
            (std::filesystem::path(cfg.out_dir) / "solution.csv").string(),
            rep.solution);

        std::ofstream os = open_out(cfg.out_dir, "report.csv");
        os << kVersion << '\n';
        os << "lambda,R,strauss_k,reg_n,residual,w1n,sup,positivity_min,"
              "certificate_min,norm_bound,norm_ok,schedule_converged\n";
        double nb = norm_bound(rep.lambda, ctx.sc, cfg.params);
        os << fmt(rep.lambda) << ',' << fmt(rep.R) << ',' << rep.strauss_k
           << ',' << rep.reg_n << ',' << fmt(rep.residual) << ','
           << fmt(rep.w1n) << ',' << fmt(rep.sup) << ','
           << fmt(rep.positivity_min) << ',' << fmt(rep.certificate_min) << ','
           << fmt(nb) << ',' << int(rep.w1n <= nb) << ','
           << int(rep.schedule_converged) << '\n';

        std::ofstream lg = open_out(cfg.out_dir, "ledger.txt");
        dump_constants(lg, ctx);
        lg << ledger_report(ctx.ledger);
        lg << "sup_bound_at_w1n " << fmt(sup_bound(ctx.ledger, rep.w1n))
           << '\n';
        lg << "theta_exponent " << fmt(theta_exponent(ctx.ledger)) << '\n';
    } catch (const CertificateFailure& e) {
        write_error_record(cfg.out_dir, "certificate_failure", e.what(),
                           e.min_value);
        throw;
    } catch (const BudgetExhausted& e) {
        write_error_record(cfg.out_dir, "budget_exhausted", e.what(),
                           e.best_residual);
        throw;
    }
}

void cmd_sweep_lambda(const RunConfig& cfg) {
    if (cfg.sweep_lambda.empty() && cfg.sweep_lambda_frac.empty())
        throw ParamError(
            "config: sweep.lambda or sweep.lambda_frac required for this "
            "command");
    RunContext ctx = make_context(cfg, false);

    std::vector<double> lambdas = cfg.sweep_lambda;
    for (double fr : cfg.sweep_lambda_frac)
        lambdas.push_back(fr * ctx.sc.lambda_star);
    for (double lam : lambdas)
        if (!(lam < ctx.sc.lambda_star))
            throw ParamError(
                "config: sweep lambdas within (0, lambda_star) violated");

    const double theta = ctx.ledger.Theta;
    double c_tilde = 0.0; // fitted at the largest lambda (first row)
    bool fitted = false;

    FkCache cache;
    std::vector<Eigen::VectorXd> chain;
    std::exception_ptr first_failure;

    std::ofstream os = open_out(cfg.out_dir, "sweep.csv");
    os << kVersion << '\n';
    os << "lambda,w1n,sup,residual,positivity_min,norm_bound,norm_ok,"
          "sup_fit_bound,sup_ok,status\n";

    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        GalerkinState st = state_of(ctx);
        st.params.lambda = lambdas[i];
        SolverConstants sc = ctx.sc;
        {
            ProblemParams pp = st.params;
            sc = compute_rho_lambda_star(pp, sc);
        }
        const double nb = norm_bound(lambdas[i], sc, cfg.params);
        try {
            SolveReport rep = solve_PD(st, sc, cfg.tol, cfg.seed + 1000 * i,
                                       chain, &cache, cfg.k_list);
            chain = {coeffs(rep.solution)};
            if (!fitted && rep.w1n > 0.0) {
                c_tilde = rep.sup / std::pow(rep.w1n, theta);
                fitted = true;
            }
            const double fit = fitted ? c_tilde * std::pow(rep.w1n, theta)
                                      : std::numeric_limits<double>::quiet_NaN();
            os << fmt(lambdas[i]) << ',' << fmt(rep.w1n) << ',' << fmt(rep.sup)
               << ',' << fmt(rep.residual) << ',' << fmt(rep.positivity_min)
               << ',' << fmt(nb) << ',' << int(rep.w1n <= nb) << ','
               << fmt(fit) << ',' << int(rep.sup <= fit * (1.0 + 1e-12)) << ','
               << "ok\n";
        } catch (const CertificateFailure&) {
            if (!first_failure) first_failure = std::current_exception();
            os << fmt(lambdas[i]) << ",nan,nan,nan,nan," << fmt(nb)
               << ",0,nan,0,certificate_failure\n";
        } catch (const BudgetExhausted&) {
            if (!first_failure) first_failure = std::current_exception();
            os << fmt(lambdas[i]) << ",nan,nan,nan,nan," << fmt(nb)
               << ",0,nan,0,budget_exhausted\n";
        }
    }
    os.close();

    if (first_failure) {
        try {
            std::rethrow_exception(first_failure);
        } catch (const CertificateFailure& e) {
            write_error_record(cfg.out_dir, "certificate_failure", e.what(),
                               e.min_value);
            throw;
        } catch (const BudgetExhausted& e) {
            write_error_record(cfg.out_dir, "budget_exhausted", e.what(),
                               e.best_residual);
            throw;
        }
    }
}

void cmd_threshold(const RunConfig& cfg) {
    if (cfg.f_kind != FKind::canonical)
        throw ParamError("threshold: canonical f required");
    if (cfg.thr_lambda.empty())
        throw ParamError(
            "config: threshold.lambda required for this command");

    RadialMesh mesh = build_mesh(cfg.thr_R, cfg.thr_M, cfg.params.N);
    auto eig = principal_eigenvalue(mesh, std::min(cfg.tol, 1e-9), cfg.seed);

    std::ofstream os = open_out(cfg.out_dir, "threshold.csv");
    os << kVersion << '\n';
    os << "lambda,a_R,Lambda,t1,C_Lambda,sigma1,delta,certified,status\n";
    double first_certified = -1.0;
    for (double lam : cfg.thr_lambda) {
        try {
            NonexistenceReport r = nonexistence_certificate(
                lam, cfg.thr_R, cfg.thr_delta, mesh, cfg.params, cfg.weight,
                eig.first);
            os << fmt(r.lambda) << ',' << fmt(r.a_R) << ',' << fmt(r.Lambda)
               << ',' << fmt(r.t1) << ',' << fmt(r.C_Lambda) << ','
               << fmt(r.sigma1) << ',' << fmt(r.delta) << ','
               << int(r.certified) << ",ok\n";
            if (r.certified && first_certified < 0.0) first_certified = lam;
        } catch (const RangeError&) {
            os << fmt(lam) << ",nan,nan,nan,nan," << fmt(eig.first) << ','
               << fmt(cfg.thr_delta) << ",0,range_error\n";
        } catch (const BudgetExhausted&) {
            os << fmt(lam) << ",nan,nan,nan,nan," << fmt(eig.first) << ','
               << fmt(cfg.thr_delta) << ",0,budget_exhausted\n";
        }
    }
    if (first_certified >= 0.0)
        os << "# first_certified_lambda " << fmt(first_certified) << '\n';
    else
        os << "# first_certified_lambda none\n";
}

void cmd_exhaust(const RunConfig& cfg) {
    if (cfg.R_list.empty())
        throw ParamError("config: mesh.R_list required for this command");
    RunContext ctx = make_context(cfg, true);
    GalerkinState proto = state_of(ctx);
    FkCache cache;
    try {
        ExhaustionReport rep =
            ball_exhaustion(proto, ctx.sc, cfg.R_list, cfg.tol,
                            double(cfg.nodes_per_unit), cfg.seed, &cache);

        std::ofstream os = open_out(cfg.out_dir, "exhaust.csv");
        os << kVersion << '\n';
        os << "# rho_tilde " << fmt(rep.rho_tilde) << '\n';
        os << "# norms_ok " << int(rep.norms_ok) << '\n';
        os << "R,M,w1n,sup,residual,positivity_min,certificate_min,norm_ok\n";
        for (std::size_t i = 0; i < rep.reports.size(); ++i) {
            const SolveReport& r = rep.reports[i];
            os << fmt(r.R) << ',' << rep.meshes[i]->elements() << ','
               << fmt(r.w1n) << ',' << fmt(r.sup) << ',' << fmt(r.residual)
               << ',' << fmt(r.positivity_min) << ','
               << fmt(r.certificate_min) << ','
               << int(r.w1n <= rep.rho_tilde * (1.0 + 1e-9) + 1e-12) << '\n';
        }

        std::ofstream as = open_out(cfg.out_dir, "annulus_sup.csv");
        as << kVersion << '\n';
        as << "m_lo,m_hi,sup\n";
        for (std::size_t m = 0; m < rep.annulus_sups.size(); ++m)
            as << m << ',' << m + 1 << ',' << fmt(rep.annulus_sups[m]) << '\n';

        std::ofstream ws = open_out(cfg.out_dir, "window_diff.csv");
        ws << kVersion << '\n';
        ws << "step,w1n_diff\n";
        for (std::size_t i = 0; i < rep.window_diffs.size(); ++i)
            ws << i << ',' << fmt(rep.window_diffs[i]) << '\n';
    } catch (const CertificateFailure& e) {
        write_error_record(cfg.out_dir, "certificate_failure", e.what(),
                           e.min_value);
        throw;
    } catch (const BudgetExhausted& e) {
        write_error_record(cfg.out_dir, "budget_exhausted", e.what(),
                           e.best_residual);
        throw;
    }
}

void cmd_check_fk(const RunConfig& cfg) {
    Nonlinearity nl(cfg.f_kind, cfg.params);

    long env_violations = 0, env_checked = 0;
    for (long k = 1; k <= 100; ++k)
        for (long i = -2000; i <= 2000; ++i) {
            if (!nl.envelope_holds(k, double(i) / 100.0)) ++env_violations;
            ++env_checked;
        }

    std::vector<double> grid;
    for (long i = -200; i <= 200; ++i) grid.push_back(double(i) / 10.0);
    GrowthReport gr = nl.check_growth(grid);

    std::ofstream os = open_out(cfg.out_dir, "fk_report.txt");
    os << "envelope_checked " << env_checked << '\n';
    os << "envelope_violations " << env_violations << '\n';
    os << "growth_violations " << gr.violations.size() << '\n';
    os << "growth_max_ratio " << fmt(gr.max_ratio) << '\n';
    for (long k : cfg.k_list) {
        double g1 = 0.0, g10 = 0.0;
        for (long i = -1000; i <= 1000; ++i) {
            double s = double(i) / 100.0;
            double gap = std::fabs(nl.fk(k, s) - nl.f(s));
            if (std::fabs(s) <= 1.0) g1 = std::max(g1, gap);
            g10 = std::max(g10, gap);
        }
        os << "fk_gap_B1_k" << k << ' ' << fmt(g1) << '\n';
        os << "fk_gap_B10_k" << k << ' ' << fmt(g10) << '\n';
    }
    os.close();

    if (env_violations > 0 || !gr.passed())
        throw std::runtime_error("check-fk: property grid found violations");
}

void cmd_eigen(const RunConfig& cfg) {
    ensure_dir(cfg.out_dir);
    RadialMesh mesh = build_mesh(cfg.R, cfg.M, cfg.params.N, cfg.grading);
    auto eig = principal_eigenvalue(mesh, std::min(cfg.tol, 1e-9), cfg.seed);

    std::ofstream os = open_out(cfg.out_dir, "eigen.csv");
    os << kVersion << '\n';
    os << "N,R,M,sigma1\n";
    os << cfg.params.N << ',' << fmt(cfg.R) << ',' << cfg.M << ','
       << fmt(eig.first) << '\n';
    write_grid_csv(
        (std::filesystem::path(cfg.out_dir) / "eigenfunction.csv").string(),
        eig.second);
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Radial N-Laplacian existence toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_override;
    std::uint64_t seed_override = 0;
    double tol_override = 0.0;
    CLI::Option* oc =
        app.add_option("--config", config_path, "config file (key = value)");
    CLI::Option* oo = app.add_option("--out", out_override, "output directory");
    CLI::Option* osd = app.add_option("--seed", seed_override, "restart seed");
    CLI::Option* ot = app.add_option("--tol", tol_override, "residual tolerance");

    // fallthrough so --config and friends may follow the subcommand name
    app.add_subcommand("solve", "one existence run")->fallthrough();
    app.add_subcommand("sweep-lambda", "lambda sweep with decay checks")
        ->fallthrough();
    app.add_subcommand("threshold", "nonexistence certificates on a grid")
        ->fallthrough();
    app.add_subcommand("exhaust", "increasing-ball exhaustion")->fallthrough();
    app.add_subcommand("check-fk", "nonlinearity property grids")
        ->fallthrough();
    app.add_subcommand("eigen", "principal eigenvalue on the mesh ball")
        ->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (!*oc) throw ParamError("cli: --config is required");
        RunConfig cfg = load_config(config_path);
        if (*oo) cfg.out_dir = out_override;
        if (*osd) cfg.seed = seed_override;
        if (*ot) {
            if (!(tol_override > 0.0))
                throw ParamError("cli: --tol > 0 violated");
            cfg.tol = tol_override;
        }

        if (app.got_subcommand("solve")) cmd_solve(cfg);
        else if (app.got_subcommand("sweep-lambda")) cmd_sweep_lambda(cfg);
        else if (app.got_subcommand("threshold")) cmd_threshold(cfg);
        else if (app.got_subcommand("exhaust")) cmd_exhaust(cfg);
        else if (app.got_subcommand("check-fk")) cmd_check_fk(cfg);
        else cmd_eigen(cfg);
        return 0;
    } catch (const ParamError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const CertificateFailure& e) {
        std::fprintf(stderr, "certificate failure: %s (min %.6g)\n", e.what(),
                     e.min_value);
        return 3;
    } catch (const BudgetExhausted& e) {
        std::fprintf(stderr, "budget exhausted: %s (best %.6g)\n", e.what(),
                     e.best_residual);
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

} // namespace nlap
