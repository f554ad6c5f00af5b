// Python face of the library. Mesh-dependent operations take and return
// plain node/value lists so no Python object ever holds a pointer into a
// C++ mesh; the pointer-free parameter structs are bound directly.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nlap/apriori.hpp"
#include "nlap/commands.hpp"
#include "nlap/config.hpp"
#include "nlap/errors.hpp"
#include "nlap/galerkin.hpp"
#include "nlap/nonlinearity.hpp"
#include "nlap/radial_mesh.hpp"
#include "nlap/thresholds.hpp"
#include "nlap/weights.hpp"

#include <sstream>

namespace py = pybind11;
using namespace nlap;

namespace {

GridFunction grid_of(const RadialMesh& mesh, const std::vector<double>& values) {
    if (values.size() != mesh.nodes.size())
        throw ParamError("values length must equal nodes length");
    GridFunction u;
    u.mesh = &mesh;
    u.values = values;
    return u;
}

py::dict report_dict(const SolveReport& rep) {
    py::dict d;
    d["r"] = rep.solution.mesh->nodes;
    d["u"] = rep.solution.values;
    d["residual"] = rep.residual;
    d["w1n"] = rep.w1n;
    d["sup"] = rep.sup;
    d["iterations"] = rep.iterations;
    d["certificate_min"] = rep.certificate_min;
    d["positivity_min"] = rep.positivity_min;
    d["lambda"] = rep.lambda;
    d["R"] = rep.R;
    d["strauss_k"] = rep.strauss_k;
    d["reg_n"] = rep.reg_n;
    d["schedule_converged"] = rep.schedule_converged;
    d["cauchy_trace"] = rep.cauchy_trace;
    d["limit_trace"] = rep.limit_trace;
    return d;
}

RunConfig config_of(const std::string& text) {
    std::istringstream ss(text);
    return parse_config(ss);
}

} // namespace

PYBIND11_MODULE(_nlap, m) {
    m.doc() = "Radial N-Laplacian existence toolkit";
    m.attr("__version__") = "0.1.0";

    py::register_exception<CertificateFailure>(m, "CertificateFailure");
    py::register_exception<BudgetExhausted>(m, "BudgetExhausted");

    py::class_<ProblemParams>(m, "ProblemParams")
        .def(py::init<>())
        .def_readwrite("N", &ProblemParams::N)
        .def_readwrite("p", &ProblemParams::p)
        .def_readwrite("q", &ProblemParams::q)
        .def_readwrite("alpha", &ProblemParams::alpha)
        .def_readwrite("a1", &ProblemParams::a1)
        .def_readwrite("lambda_", &ProblemParams::lambda)
        .def_readwrite("weight_gamma", &ProblemParams::weight_gamma)
        .def("conjugate", &ProblemParams::conjugate);

    py::class_<Weight>(m, "Weight")
        .def(py::init<>())
        .def_property(
            "kind", [](const Weight& w) { return to_string(w.kind); },
            [](Weight& w, const std::string& s) {
                w.kind = weight_kind_from_string(s);
            })
        .def_readwrite("gamma_or_rate", &Weight::gamma_or_rate)
        .def_readwrite("amplitude", &Weight::amplitude);

    py::class_<SolverConstants>(m, "SolverConstants")
        .def(py::init<>())
        .def_readwrite("K1", &SolverConstants::K1)
        .def_readwrite("K2", &SolverConstants::K2)
        .def_readwrite("K3", &SolverConstants::K3)
        .def_readwrite("C_alphaN", &SolverConstants::C_alphaN)
        .def_readwrite("C_star", &SolverConstants::C_star)
        .def_readonly("rho", &SolverConstants::rho)
        .def_readonly("varsigma", &SolverConstants::varsigma)
        .def_readonly("lambda_star", &SolverConstants::lambda_star);

    py::class_<LedgerAux>(m, "LedgerAux")
        .def(py::init<>())
        .def_readwrite("C_rho", &LedgerAux::C_rho)
        .def_readwrite("A", &LedgerAux::A)
        .def_readwrite("R_star", &LedgerAux::R_star);

    py::class_<MoserLedger>(m, "MoserLedger")
        .def_readonly("N", &MoserLedger::N)
        .def_readonly("pbar_star", &MoserLedger::pbar_star)
        .def_readonly("ptilde", &MoserLedger::ptilde)
        .def_readonly("beta0", &MoserLedger::beta0)
        .def_readonly("P", &MoserLedger::P)
        .def_readonly("S1", &MoserLedger::S1)
        .def_readonly("S2", &MoserLedger::S2)
        .def_readonly("S3", &MoserLedger::S3)
        .def_readonly("Q_inf", &MoserLedger::Q_inf)
        .def_readonly("C_star", &MoserLedger::C_star)
        .def_readonly("B0", &MoserLedger::B0)
        .def_readonly("C0", &MoserLedger::C0)
        .def_readonly("Cprime", &MoserLedger::Cprime)
        .def_readonly("Theta", &MoserLedger::Theta)
        .def_readonly("s2_tail", &MoserLedger::s2_tail)
        .def_readonly("s3_tail", &MoserLedger::s3_tail);

    py::class_<NonexistenceReport>(m, "NonexistenceReport")
        .def_readonly("lambda_", &NonexistenceReport::lambda)
        .def_readonly("a_R", &NonexistenceReport::a_R)
        .def_readonly("Lambda", &NonexistenceReport::Lambda)
        .def_readonly("t1", &NonexistenceReport::t1)
        .def_readonly("C_Lambda", &NonexistenceReport::C_Lambda)
        .def_readonly("sigma1", &NonexistenceReport::sigma1)
        .def_readonly("delta", &NonexistenceReport::delta)
        .def_readonly("certified", &NonexistenceReport::certified);

    py::class_<Nonlinearity>(m, "Nonlinearity")
        .def(py::init([](const std::string& kind, const ProblemParams& p) {
                 return std::make_unique<Nonlinearity>(fkind_from_string(kind),
                                                       p);
             }),
             py::arg("kind"), py::arg("params"))
        .def("f", &Nonlinearity::f)
        .def("G", &Nonlinearity::G, py::arg("t"), py::arg("tol") = 1e-12)
        .def("fk", &Nonlinearity::fk)
        .def("envelope_holds", &Nonlinearity::envelope_holds, py::arg("k"),
             py::arg("s"), py::arg("tol") = 1e-9)
        .def("check_growth", [](const Nonlinearity& nl,
                                const std::vector<double>& grid) {
            GrowthReport r = nl.check_growth(grid);
            return py::make_tuple(r.violations.size(), r.max_ratio);
        });

    m.def("sphere_area", &sphere_area);
    m.def("alpha_N", &alpha_N);
    m.def("phi_n", &phi_n);
    m.def("log_phi_n", &log_phi_n);
    m.def("validate_params", &validate_params);

    m.def("weight_eval", &weight_eval);
    m.def("weight_lnq_norm", &weight_lnq_norm);

    m.def(
        "w1n_norm",
        [](const std::vector<double>& nodes, const std::vector<double>& values,
           int N) {
            RadialMesh mesh = build_mesh_from_nodes(nodes, N);
            return w1n_norm(grid_of(mesh, values));
        },
        py::arg("nodes"), py::arg("values"), py::arg("N"));
    m.def(
        "ls_norm",
        [](const std::vector<double>& nodes, const std::vector<double>& values,
           int N, double s) {
            RadialMesh mesh = build_mesh_from_nodes(nodes, N);
            return ls_norm(grid_of(mesh, values), s);
        },
        py::arg("nodes"), py::arg("values"), py::arg("N"), py::arg("s"));
    m.def(
        "tm_functional",
        [](const std::vector<double>& nodes, const std::vector<double>& values,
           int N, double alpha) {
            RadialMesh mesh = build_mesh_from_nodes(nodes, N);
            return tm_functional(grid_of(mesh, values), alpha);
        },
        py::arg("nodes"), py::arg("values"), py::arg("N"), py::arg("alpha"));
    m.def(
        "annulus_sup",
        [](const std::vector<double>& nodes, const std::vector<double>& values,
           int N, double a, double b) {
            RadialMesh mesh = build_mesh_from_nodes(nodes, N);
            return annulus_sup(grid_of(mesh, values), a, b);
        },
        py::arg("nodes"), py::arg("values"), py::arg("N"), py::arg("a"),
        py::arg("b"));

    m.def(
        "principal_eigenvalue",
        [](double R, int M, int N, double tol, std::uint64_t seed) {
            RadialMesh mesh = build_mesh(R, M, N);
            auto eig = principal_eigenvalue(mesh, tol, seed);
            return py::make_tuple(eig.first, mesh.nodes, eig.second.values);
        },
        py::arg("R"), py::arg("M"), py::arg("N"), py::arg("tol") = 1e-9,
        py::arg("seed") = 0);

    m.def("H_eval", &H_eval);
    m.def("solve_t1", &solve_t1);
    m.def("C_Lambda_eval", &C_Lambda_eval);
    m.def(
        "nonexistence_certificate",
        [](double lambda, double R, double delta, int M,
           const ProblemParams& params, const Weight& weight) {
            RadialMesh mesh = build_mesh(R, M, params.N);
            return nonexistence_certificate(lambda, R, delta, mesh, params,
                                            weight);
        },
        py::arg("lambda_"), py::arg("R"), py::arg("delta"), py::arg("M"),
        py::arg("params"), py::arg("weight"));

    m.def(
        "estimate_constants",
        [](double R, int M, const ProblemParams& params, const Weight& weight,
           double pbar_star, int samples, std::uint64_t seed) {
            RadialMesh mesh = build_mesh(R, M, params.N);
            Nonlinearity nl(FKind::canonical, params);
            GridFunction phi = default_phi_aux(mesh);
            return estimate_constants(mesh, nl, params, weight, phi, pbar_star,
                                      samples, seed);
        },
        py::arg("R"), py::arg("M"), py::arg("params"), py::arg("weight"),
        py::arg("pbar_star") = 10.0, py::arg("samples") = 200,
        py::arg("seed") = 0);
    m.def("compute_rho_lambda_star", &compute_rho_lambda_star);

    m.def("build_ledger", &build_ledger, py::arg("N"), py::arg("pbar_star"),
          py::arg("ptilde"), py::arg("C_star"), py::arg("aux") = LedgerAux{});
    m.def("sup_bound", &sup_bound);
    m.def("decay_bound", &decay_bound);
    m.def("theta_exponent", &theta_exponent);
    m.def("ledger_report", &ledger_report);

    m.def(
        "solve_sublinear",
        [](double b, double R, int M, int N, double q, double tol,
           std::uint64_t seed) {
            RadialMesh mesh = build_mesh(R, M, N);
            GridFunction u = solve_sublinear(b, mesh, N, q, tol, seed);
            return py::make_tuple(mesh.nodes, u.values);
        },
        py::arg("b"), py::arg("R"), py::arg("M"), py::arg("N"), py::arg("q"),
        py::arg("tol") = 1e-10, py::arg("seed") = 0);

    // Full existence run from config text; same resolution path as the CLI
    // solve subcommand, no files written.
    m.def(
        "solve_run",
        [](const std::string& config_text) {
            RunConfig cfg = config_of(config_text);
            RunContext ctx = make_context(cfg, true);
            GalerkinState st;
            st.mesh = ctx.mesh.get();
            st.nl = ctx.nl.get();
            st.params = cfg.params;
            st.params.lambda = ctx.lambda;
            st.weight = cfg.weight;
            st.phi_aux = ctx.phi;
            SolveReport rep;
            if (ctx.lambda < ctx.sc.lambda_star) {
                rep = solve_PD(st, ctx.sc, cfg.tol, cfg.seed, {}, nullptr,
                               cfg.k_list);
            } else if (ctx.sc.varsigma > 0.0) {
                st.strauss_k = cfg.k_list.back();
                st.reg_n = cfg.k_list.back();
                rep = solve_PDn(st, ctx.sc.rho, cfg.tol, cfg.seed);
            } else {
                throw CertificateFailure(
                    "solve_run: certificate margin varsigma <= 0 at lambda "
                    "= " + std::to_string(ctx.lambda),
                    ctx.sc.varsigma);
            }
            py::dict d = report_dict(rep);
            d["lambda_star"] = ctx.sc.lambda_star;
            d["rho"] = ctx.sc.rho;
            d["varsigma"] = ctx.sc.varsigma;
            d["K1"] = ctx.sc.K1;
            d["theta"] = ctx.ledger.Theta;
            return d;
        },
        py::arg("config_text"));

    // Increasing-ball exhaustion from config text.
    m.def(
        "exhaust_run",
        [](const std::string& config_text) {
            RunConfig cfg = config_of(config_text);
            if (cfg.R_list.empty())
                throw ParamError("exhaust_run: mesh.R_list required");
            RunContext ctx = make_context(cfg, true);
            GalerkinState proto;
            proto.mesh = ctx.mesh.get();
            proto.nl = ctx.nl.get();
            proto.params = cfg.params;
            proto.params.lambda = ctx.lambda;
            proto.weight = cfg.weight;
            proto.phi_aux = ctx.phi;
            ExhaustionReport rep =
                ball_exhaustion(proto, ctx.sc, cfg.R_list, cfg.tol,
                                double(cfg.nodes_per_unit), cfg.seed);
            py::list rows;
            for (const SolveReport& r : rep.reports) rows.append(report_dict(r));
            py::dict d;
            d["reports"] = rows;
            d["window_diffs"] = rep.window_diffs;
            d["annulus_sups"] = rep.annulus_sups;
            d["rho_tilde"] = rep.rho_tilde;
            d["norms_ok"] = rep.norms_ok;
            return d;
        },
        py::arg("config_text"));
}
