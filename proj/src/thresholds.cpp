#include "nlap/thresholds.hpp"

#include "nlap/errors.hpp"
#include "nlap/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace nlap {

namespace {
constexpr double kLogDblMax = 709.782712893384;
}

SolverConstants compute_rho_lambda_star(const ProblemParams& params,
                                        SolverConstants in) {
    validate_params(params);
    if (!(in.K1 > 0.0 && in.K2 > 0.0 && in.K3 > 0.0 && in.C_alphaN > 0.0 &&
          in.C_star > 0.0))
        throw ParamError("compute_rho_lambda_star: constants must be positive");
    const double N = double(params.N);
    const double branch1 =
        std::pow(2.0 * in.K2 * in.C_alphaN, -1.0 / (params.p - N));
    const double branch2 =
        0.25 * std::pow(alpha_N(params.N) / (N * params.alpha), (N - 1.0) / N);
    in.rho = std::min(branch1, branch2);
    in.lambda_star = std::pow(in.rho, N - params.q) / (4.0 * in.K1);
    in.varsigma = 0.5 * std::pow(in.rho, N) -
                  params.lambda * in.K1 * std::pow(in.rho, params.q);
    return in;
}

double H_eval(double t, const ProblemParams& params) {
    if (t < 0.0) throw DomainError("H_eval: t>=0 violated");
    if (t == 0.0) return 0.0;
    const double np = params.conjugate();
    const double arg = params.alpha * std::pow(t, np);
    if (arg > kLogDblMax)
        throw RangeError("H_eval: exponential overflow at t", t);
    const double N = double(params.N);
    const double term1 =
        phi_n(params.N, arg) * (params.p - N) * std::pow(t, params.p - params.q);
    const double term2 = params.alpha * np *
                         std::pow(t, params.p - params.q + np) *
                         phi_n(params.N - 1, arg);
    return term1 + term2;
}

double solve_t1(double Lambda, const ProblemParams& params, double tol) {
    if (!(Lambda > 0.0)) throw ParamError("solve_t1: Lambda>0 violated");
    if (!(tol > 0.0)) throw ParamError("solve_t1: tol>0 violated");
    const double target = Lambda * (double(params.N) - params.q);

    double lo = 0.0, hi = 1.0;
    while (true) {
        double v;
        try {
            v = H_eval(hi, params);
        } catch (const RangeError&) {
            throw RangeError("solve_t1: no bracket below the overflow bound", hi);
        }
        if (v >= target) break;
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300)
            throw RangeError("solve_t1: no bracket below the overflow bound", hi);
    }

    double best = hi, best_res = std::abs(H_eval(hi, params) - target);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break; // bisection hit double resolution
        const double v = H_eval(mid, params);
        const double res = std::abs(v - target);
        if (res < best_res) { best_res = res; best = mid; }
        if (res <= tol) return mid;
        (v < target ? lo : hi) = mid;
    }
    if (best_res <= tol) return best;
    throw BudgetExhausted("solve_t1: H resolution floor above tol", best_res);
}

double C_Lambda_eval(double t1, double Lambda, const ProblemParams& params) {
    if (!(t1 > 0.0)) throw ParamError("C_Lambda_eval: t1>0 violated");
    const double np = params.conjugate();
    const double arg = params.alpha * std::pow(t1, np);
    const double N = double(params.N);
    return Lambda * std::pow(t1, params.q - N) +
           std::pow(t1, params.p - N) * phi_n(params.N, arg);
}

namespace {

// Rayleigh quotient machinery on nodal vectors u_0..u_{M-1} (u_M = 0).
struct RayleighWork {
    const RadialMesh& mesh;
    int N;
    std::vector<double> elem_meas; // int_e r^{N-1} dr per element

    explicit RayleighWork(const RadialMesh& m) : mesh(m), N(m.N) {
        const int M = m.elements();
        elem_meas.resize(M);
        for (int e = 0; e < M; ++e) {
            double acc = 0.0;
            for (int q = 0; q < 4; ++q) acc += m.qp_rmeas[4 * e + q];
            elem_meas[e] = acc;
        }
    }

    double powN(double x) const {
        return N == 2 ? x * x : std::pow(std::abs(x), N);
    }
    double dpowN(double x) const { // d/dx |x|^N = N |x|^{N-2} x
        return N == 2 ? 2.0 * x : double(N) * std::pow(std::abs(x), N - 2) * x;
    }

    // value and gradient of A(u) = int |u'|^N r^{N-1}, B(u) = int |u|^N r^{N-1}
    void eval(const std::vector<double>& u, double& A, double& B,
              std::vector<double>* gA, std::vector<double>* gB) const {
        const int M = mesh.elements();
        A = B = 0.0;
        if (gA) { gA->assign(u.size(), 0.0); gB->assign(u.size(), 0.0); }
        for (int e = 0; e < M; ++e) {
            const double h = mesh.h(e);
            const double ul = u[e];
            const double ur = (e + 1 < M + 1) ? (std::size_t(e + 1) < u.size() ? u[e + 1] : 0.0) : 0.0;
            const double du = (ur - ul) / h;
            A += powN(du) * elem_meas[e];
            if (gA) {
                const double dA = dpowN(du) * elem_meas[e] / h;
                (*gA)[e] -= dA;
                if (std::size_t(e + 1) < u.size()) (*gA)[e + 1] += dA;
            }
            for (int q = 0; q < 4; ++q) {
                const double r = mesh.qp_r[4 * e + q];
                const double t = (r - mesh.nodes[e]) / h;
                const double v = ul * (1.0 - t) + ur * t;
                const double w = mesh.qp_rmeas[4 * e + q];
                B += powN(v) * w;
                if (gB) {
                    const double dB = dpowN(v) * w;
                    (*gB)[e] += dB * (1.0 - t);
                    if (std::size_t(e + 1) < u.size()) (*gB)[e + 1] += dB * t;
                }
            }
        }
    }
};

} // namespace

namespace {

// Tridiagonal SPD solve (Thomas). diag/off sized n and n-1.
struct Tridiag {
    std::vector<double> diag, off; // off[i] couples i and i+1
    std::vector<double> c_fact, d_fact;

    void factor() {
        const std::size_t n = diag.size();
        c_fact.resize(n);
        d_fact.resize(n);
        c_fact[0] = off.empty() ? 0.0 : off[0] / diag[0];
        d_fact[0] = diag[0];
        for (std::size_t i = 1; i < n; ++i) {
            d_fact[i] = diag[i] - off[i - 1] * c_fact[i - 1];
            c_fact[i] = (i + 1 < n) ? off[i] / d_fact[i] : 0.0;
        }
    }
    void solve(const std::vector<double>& b, std::vector<double>& x) const {
        const std::size_t n = diag.size();
        x.resize(n);
        x[0] = b[0];
        for (std::size_t i = 1; i < n; ++i) x[i] = b[i] - off[i - 1] / d_fact[i - 1] * x[i - 1];
        x[n - 1] /= d_fact[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) x[i] = x[i] / d_fact[i] - c_fact[i] * x[i + 1];
    }
};

// Linear FEM matrix for int (v'w' + vw) r^{N-1} dr on free dofs 0..M-1.
// Preconditions the Rayleigh gradient: descent measured in the W^{1,N}-like
// metric instead of l2, which removes the mesh-size ill-conditioning.
Tridiag build_preconditioner(const RadialMesh& mesh) {
    const int M = mesh.elements();
    Tridiag T;
    T.diag.assign(M, 0.0);
    T.off.assign(M - 1, 0.0);
    for (int e = 0; e < M; ++e) {
        const double h = mesh.h(e);
        double m00 = 0, m01 = 0, m11 = 0, s = 0;
        for (int q = 0; q < 4; ++q) {
            const double r = mesh.qp_r[4 * e + q];
            const double t = (r - mesh.nodes[e]) / h;
            const double w = mesh.qp_rmeas[4 * e + q];
            s += w / (h * h);
            m00 += w * (1 - t) * (1 - t);
            m01 += w * (1 - t) * t;
            m11 += w * t * t;
        }
        // dof e always free; dof e+1 free unless it is the Dirichlet node M
        T.diag[e] += s + m00;
        if (e + 1 < M) {
            T.diag[e + 1] += s + m11;
            T.off[e] += -s + m01;
        }
    }
    T.factor();
    return T;
}

} // namespace

std::pair<double, GridFunction> principal_eigenvalue(const RadialMesh& mesh,
                                                     double tol,
                                                     std::uint64_t seed) {
    if (!(tol > 0.0)) throw ParamError("principal_eigenvalue: tol>0 violated");
    const int M = mesh.elements();
    RayleighWork work(mesh);
    Tridiag pre = build_preconditioner(mesh);

    // free dofs: nodes 0..M-1 (Dirichlet at r_M)
    auto rayleigh = [&](const std::vector<double>& u, std::vector<double>* grad) {
        double A, B;
        std::vector<double> gA, gB;
        work.eval(u, A, B, grad ? &gA : nullptr, grad ? &gB : nullptr);
        if (!(B > 0.0)) throw ParamError("principal_eigenvalue: zero trial function");
        const double R = A / B;
        if (grad) {
            grad->resize(u.size());
            for (std::size_t i = 0; i < u.size(); ++i)
                (*grad)[i] = (gA[i] - R * gB[i]) / B;
        }
        return R;
    };

    double best_val = std::numeric_limits<double>::infinity();
    std::vector<double> best_u;
    bool any_converged = false;
    double best_gnorm = std::numeric_limits<double>::infinity();

    Rng rng(seed ^ 0xabcdef0123456789ULL);
    for (int restart = 0; restart < 5; ++restart) {
        std::vector<double> u(M);
        for (int i = 0; i < M; ++i) {
            const double r = mesh.nodes[i] / mesh.R;
            double base = 1.0 - r * r;
            double jitter = restart == 0 ? 0.0 : 0.35 * rng.uniform() *
                                std::sin((1.0 + restart) * 3.14159265358979 * r);
            u[i] = base + jitter * base;
        }

        std::vector<double> g, d, u_prev, d_prev;
        double val = rayleigh(u, &g);
        double step = 1.0;
        bool converged = false;
        for (int it = 0; it < 500; ++it) {
            pre.solve(g, d); // preconditioned direction
            double gd = 0.0;
            for (std::size_t i = 0; i < u.size(); ++i) gd += g[i] * d[i];
            if (gd <= tol * tol * std::max(1.0, val * val)) { converged = true; break; }

            if (!u_prev.empty()) { // BB1 step in the preconditioned metric
                double sty = 0.0, sts = 0.0;
                for (std::size_t i = 0; i < u.size(); ++i) {
                    const double s = u[i] - u_prev[i], y = d[i] - d_prev[i];
                    sty += s * y;
                    sts += s * s;
                }
                if (sty > 1e-300 && sts > 0.0) step = sts / sty;
                step = std::min(std::max(step, 1e-10), 1e8);
            }

            u_prev = u;
            d_prev = d;
            double trial_step = step;
            bool accepted = false;
            for (int bt = 0; bt < 50; ++bt) {
                std::vector<double> ut(u.size());
                for (std::size_t i = 0; i < u.size(); ++i)
                    ut[i] = u[i] - trial_step * d[i];
                double A, B;
                work.eval(ut, A, B, nullptr, nullptr);
                if (B > 0.0) {
                    const double scale = std::pow(B, -1.0 / double(work.N));
                    for (auto& x : ut) x *= scale;
                    double vt = rayleigh(ut, nullptr);
                    // Armijo sufficient decrease along -d
                    if (vt <= val - 1e-4 * trial_step * gd) {
                        u = std::move(ut);
                        val = vt;
                        accepted = true;
                        break;
                    }
                }
                trial_step *= 0.5;
            }
            if (!accepted) break; // stagnation: no descent at any step length
            val = rayleigh(u, &g);
        }
        {
            std::vector<double> dfin;
            pre.solve(g, dfin);
            double gd = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) gd += g[i] * dfin[i];
            best_gnorm = std::min(best_gnorm, std::sqrt(std::max(0.0, gd)));
        }
        if (val < best_val) { best_val = val; best_u = u; }
        any_converged = any_converged || converged;
    }
    if (!any_converged)
        throw BudgetExhausted("principal_eigenvalue: descent stagnated above tol",
                              best_gnorm);

    // sign-fix and sup-normalize the eigenfunction
    double m = 0.0;
    for (double x : best_u) m += x;
    if (m < 0.0) for (auto& x : best_u) x = -x;
    double sup = 0.0;
    for (double x : best_u) sup = std::max(sup, std::abs(x));
    GridFunction phi = zero_function(mesh);
    for (int i = 0; i < M; ++i) phi.values[i] = best_u[i] / sup;
    return {best_val, std::move(phi)};
}

NonexistenceReport nonexistence_certificate(double lambda, double R,
                                            double delta,
                                            const RadialMesh& mesh,
                                            const ProblemParams& params,
                                            const Weight& weight,
                                            double sigma1_hint) {
    if (!(delta > 0.0)) throw ParamError("nonexistence_certificate: delta>0 violated");
    if (!(lambda > 0.0)) throw ParamError("nonexistence_certificate: lambda>0 violated");
    NonexistenceReport rep;
    rep.lambda = lambda;
    rep.delta = delta;
    rep.a_R = weight_inf_on_ball(weight, R);
    rep.Lambda = lambda * rep.a_R;
    rep.t1 = solve_t1(rep.Lambda, params, 1e-10 * std::max(1.0, rep.Lambda));
    rep.C_Lambda = C_Lambda_eval(rep.t1, rep.Lambda, params);
    rep.sigma1 = sigma1_hint > 0.0
                     ? sigma1_hint
                     : principal_eigenvalue(mesh, 1e-7).first;
    rep.certified = rep.C_Lambda >= rep.sigma1 + rep.delta + 1.0;
    return rep;
}

} // namespace nlap
