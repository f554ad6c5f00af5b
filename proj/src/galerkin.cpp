#include "nlap/galerkin.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "nlap/errors.hpp"
#include "nlap/rng.hpp"

namespace nlap {

namespace {

// |v|^{N-2} v without pow for the common dimensions.
inline double signed_power(double v, int N) {
    if (N == 2) return v;
    if (N == 3) return std::abs(v) * v;
    if (N == 4) return v * v * v;
    return std::pow(std::abs(v), N - 2) * v;
}

inline double abs_power(double v, int N) {
    double a = std::abs(v);
    if (N == 2) return a * a;
    if (N == 3) return a * a * a;
    return std::pow(a, N);
}

} // namespace

GridFunction default_phi_aux(const RadialMesh& mesh) {
    GridFunction g;
    g.mesh = &mesh;
    g.values.resize(mesh.nodes.size());
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
        g.values[i] = std::exp(-mesh.nodes[i]);
    return g;
}

// ---------------------------------------------------------------------------
// FkTable

FkTable::FkTable(const Nonlinearity& nl, long k, double s_max, double rel_tol)
    : nl_(&nl), k_(k) {
    if (k_ < 1) throw ParamError("FkTable: k >= 1 violated");
    if (!(s_max > 0.0) || !(rel_tol > 0.0))
        throw ParamError("FkTable: s_max > 0 and rel_tol > 0 violated");
    s_lo_ = 1.0 / double(k_);
    s_hi_ = std::min(double(k_), s_max);
    if (!(s_hi_ > s_lo_ * (1.0 + 1e-12))) {
        s_hi_ = s_lo_;
        return; // no middle branch worth tabulating (k == 1)
    }

    const double invk = s_lo_;
    auto value = [&](double s) { return nl.fk(k_, s); };
    // Exact derivative of the averaged branch: d/ds k G(s..s+1/k).
    auto deriv = [&](double s) { return double(k_) * (nl.f(s + invk) - nl.f(s)); };

    long budget = 120000;
    std::function<void(double, double, double, double, double, double, int)> rec =
        [&](double a, double fa, double da, double b, double fb, double db,
            int depth) {
            if (--budget < 0)
                throw BudgetExhausted("FkTable: refinement budget exhausted",
                                      b - a);
            const double mid = 0.5 * (a + b);
            const double fm = value(mid);
            // cubic Hermite at the midpoint: t = 1/2
            const double hm = 0.5 * (fa + fb) + 0.125 * (b - a) * (da - db);
            const double scale =
                std::max({std::abs(fm), std::abs(fa), std::abs(fb), 1e-280});
            if (std::abs(hm - fm) <= rel_tol * scale || depth >= 28) {
                xs_.push_back(a);
                ys_.push_back(fa);
                ds_.push_back(da);
                return;
            }
            const double dm = deriv(mid);
            rec(a, fa, da, mid, fm, dm, depth + 1);
            rec(mid, fm, dm, b, fb, db, depth + 1);
        };

    // Geometric seeding matches the error density of the exponential tail.
    const int seeds = 32;
    double prev = s_lo_, fprev = value(prev), dprev = deriv(prev);
    for (int j = 1; j <= seeds; ++j) {
        double sj = s_lo_ * std::pow(s_hi_ / s_lo_, double(j) / seeds);
        if (j == seeds) sj = s_hi_;
        double fj = value(sj), dj = deriv(sj);
        rec(prev, fprev, dprev, sj, fj, dj, 0);
        prev = sj;
        fprev = fj;
        dprev = dj;
    }
    xs_.push_back(prev);
    ys_.push_back(fprev);
    ds_.push_back(dprev);

    // Spot validation against the direct evaluation.
    for (int j = 0; j < 64; ++j) {
        double s = s_lo_ * std::pow(s_hi_ / s_lo_, (j + 0.5) / 64.0);
        double direct = value(s);
        double err = std::abs(eval(s) - direct);
        if (err > 50.0 * rel_tol * std::max(std::abs(direct), 1e-280))
            throw QuadratureError("FkTable: validation against direct f_k failed",
                                  err);
    }
}

double FkTable::eval(double s) const {
    if (xs_.size() >= 2 && s >= s_lo_ && s <= s_hi_) {
        auto it = std::upper_bound(xs_.begin(), xs_.end(), s);
        std::size_t i = (it == xs_.begin()) ? 0 : std::size_t(it - xs_.begin()) - 1;
        if (i > xs_.size() - 2) i = xs_.size() - 2;
        const double a = xs_[i], h = xs_[i + 1] - a;
        const double t = (s - a) / h, t1 = 1.0 - t;
        const double h00 = (1.0 + 2.0 * t) * t1 * t1;
        const double h10 = t * t1 * t1;
        const double h01 = t * t * (3.0 - 2.0 * t);
        const double h11 = t * t * (t - 1.0);
        return ys_[i] * h00 + ds_[i] * h * h10 + ys_[i + 1] * h01 +
               ds_[i + 1] * h * h11;
    }
    return nl_->fk(k_, s); // linear core, plateau, and beyond-span arguments
}

std::shared_ptr<const FkTable> FkCache::get(const Nonlinearity& nl, long k) {
    auto it = by_k.find(k);
    if (it != by_k.end()) return it->second;
    auto t = std::make_shared<const FkTable>(nl, k, 8.0, 1e-10);
    by_k.emplace(k, t);
    return t;
}

// ---------------------------------------------------------------------------
// Assembly engine

namespace {

struct Engine {
    GalerkinState st;
    int m = 0;
    int N = 2;
    double q = 1.5, lam = 0.0, inv_n = 0.0;
    double np = 0.0;  // N' = N/(N-1)
    double eps = 0.0; // principal regularization (N > 2 continuation stages)
    bool sqrt_q = false;
    std::vector<double> qwm;  // omega * w * r^{N-1} per quadrature point
    std::vector<double> qt;   // local coordinate per quadrature point
    std::vector<double> qa;   // weight a(r) per quadrature point
    std::vector<double> pmeas; // omega * int_e r^{N-1} dr per element
    Eigen::VectorXd phi_vec;  // omega * int phi w_j r^{N-1} dr per dof
    std::shared_ptr<const FkTable> table;

    Engine(const GalerkinState& s, FkCache* cache, bool tabulate) : st(s) {
        if (!st.mesh) throw ParamError("galerkin: state.mesh is null");
        if (!st.nl) throw ParamError("galerkin: state.nl is null");
        validate_params(st.params);
        validate_weight(st.weight, st.params.N, st.params.q);
        if (st.mesh->N != st.params.N)
            throw ParamError("galerkin: mesh dimension differs from params.N");
        if (st.nl->params().N != st.params.N)
            throw ParamError("galerkin: nonlinearity dimension differs from params.N");
        if (st.reg_n < 1) throw ParamError("galerkin: reg_n >= 1 violated");

        const RadialMesh& mesh = *st.mesh;
        m = mesh.elements();
        N = st.params.N;
        q = st.params.q;
        lam = st.params.lambda;
        np = st.params.conjugate();
        inv_n = st.use_phi ? 1.0 / double(st.reg_n) : 0.0;
        sqrt_q = std::abs(q - 1.5) < 1e-15;

        const std::size_t Q = mesh.qp_r.size();
        qwm.resize(Q);
        qt.resize(Q);
        qa.resize(Q);
        pmeas.assign(std::size_t(m), 0.0);
        std::vector<double> qphi(Q, 0.0);

        GridFunction phi = st.phi_aux;
        if (st.use_phi && phi.values.empty()) phi = default_phi_aux(mesh);
        if (st.use_phi && (phi.values.size() != mesh.nodes.size() ||
                           (phi.mesh && phi.mesh != st.mesh)))
            throw ParamError("galerkin: phi_aux lives on a different mesh");

        for (int e = 0; e < m; ++e) {
            const double h = mesh.h(e);
            for (int g = 0; g < 4; ++g) {
                const std::size_t iq = std::size_t(4 * e + g);
                qwm[iq] = mesh.omega * mesh.qp_rmeas[iq];
                qt[iq] = (mesh.qp_r[iq] - mesh.nodes[e]) / h;
                qa[iq] = weight_eval(st.weight, mesh.qp_r[iq]);
                pmeas[std::size_t(e)] += qwm[iq];
                if (st.use_phi) {
                    const double pl = phi.values[std::size_t(e)];
                    const double pr = phi.values[std::size_t(e) + 1];
                    qphi[iq] = pl + (pr - pl) * qt[iq];
                }
            }
        }

        phi_vec = Eigen::VectorXd::Zero(m);
        if (st.use_phi) {
            for (int e = 0; e < m; ++e)
                for (int g = 0; g < 4; ++g) {
                    const std::size_t iq = std::size_t(4 * e + g);
                    const double w = qwm[iq] * qphi[iq];
                    phi_vec[e] += w * (1.0 - qt[iq]);
                    if (e + 1 < m) phi_vec[e + 1] += w * qt[iq];
                }
        }

        if (st.use_f && st.strauss_k >= 1 && tabulate)
            table = cache ? cache->get(*st.nl, st.strauss_k)
                          : std::make_shared<const FkTable>(*st.nl, st.strauss_k,
                                                            8.0, 1e-10);
    }

    double fterm(double up) const {
        if (!st.use_f) return 0.0;
        if (st.strauss_k >= 1)
            return table ? table->eval(up) : st.nl->fk(st.strauss_k, up);
        return st.nl->f(up);
    }

    double qpow(double up) const { // (u+)^{q-1}
        if (up <= 0.0) return 0.0;
        return sqrt_q ? std::sqrt(up) : std::pow(up, q - 1.0);
    }

    double principal(double du) const { // regularized |u'|^{N-2} u'
        if (N == 2) return du;
        if (eps == 0.0) return signed_power(du, N);
        return std::pow(du * du + eps * eps, 0.5 * double(N - 2)) * du;
    }

    void element_rows(const Eigen::VectorXd& xi, int e, Eigen::VectorXd& F) const {
        const RadialMesh& mesh = *st.mesh;
        const double ul = xi[e];
        const double ur = (e + 1 < m) ? xi[e + 1] : 0.0;
        const double h = mesh.h(e);
        const double c = principal((ur - ul) / h) * pmeas[std::size_t(e)] / h;
        F[e] -= c;
        if (e + 1 < m) F[e + 1] += c;
        for (int g = 0; g < 4; ++g) {
            const std::size_t iq = std::size_t(4 * e + g);
            const double t = qt[iq];
            const double u = ul + (ur - ul) * t;
            const double up = u > 0.0 ? u : 0.0;
            double z = signed_power(u, N);
            if (lam != 0.0 && up > 0.0) z -= lam * qa[iq] * qpow(up);
            if (st.use_f && up > 0.0) z -= fterm(up);
            const double w = qwm[iq] * z;
            F[e] += w * (1.0 - t);
            if (e + 1 < m) F[e + 1] += w * t;
        }
    }

    Eigen::VectorXd assemble(const Eigen::VectorXd& xi) const {
        if (xi.size() != m) throw ParamError("assemble_F: xi has wrong length");
        Eigen::VectorXd F = st.use_phi
                                ? Eigen::VectorXd(-inv_n * phi_vec)
                                : Eigen::VectorXd(Eigen::VectorXd::Zero(m));
        // Spikes and other near-empty vectors only touch their own elements.
        int nnz = 0;
        for (int j = 0; j < m && nnz <= 8; ++j)
            if (xi[j] != 0.0) ++nnz;
        if (nnz <= 8) {
            int last = -1;
            for (int j = 0; j < m; ++j) {
                if (xi[j] == 0.0) continue;
                for (int e = std::max(0, j - 1); e <= std::min(m - 1, j); ++e) {
                    if (e > last) element_rows(xi, e, F);
                    last = std::max(last, e);
                }
            }
            return F;
        }
        for (int e = 0; e < m; ++e) element_rows(xi, e, F);
        return F;
    }

    double xi_norm(const Eigen::VectorXd& xi) const {
        GridFunction g = to_grid(xi);
        return w1n_norm(g);
    }

    GridFunction to_grid(const Eigen::VectorXd& xi) const {
        GridFunction g;
        g.mesh = st.mesh;
        g.values.assign(st.mesh->nodes.size(), 0.0);
        for (int j = 0; j < m && j < xi.size(); ++j)
            g.values[std::size_t(j)] = xi[j];
        return g;
    }

    FiniteField field(double radius) const {
        FiniteField f;
        f.dim = m;
        f.radius = radius;
        f.bandwidth = 1;
        f.eval = [this](const Eigen::VectorXd& x) { return assemble(x); };
        f.norm = [this](const Eigen::VectorXd& x) { return xi_norm(x); };
        return f;
    }
};

// Boundary probe profiles beyond axis spikes and gaussians: cosine packets,
// log concentration bumps, decaying products, with random sign flips so the
// negative side of the sphere is exercised.
std::vector<Eigen::VectorXd> family_probes(const RadialMesh& mesh, int count,
                                           std::uint64_t seed) {
    const int m = mesh.elements();
    const double R = mesh.R;
    Rng rng(seed ^ 0x7c15bf9e3779b97fULL);
    std::vector<Eigen::VectorXd> out;
    out.reserve(std::size_t(count));
    const double pi = std::acos(-1.0);
    for (int i = 0; i < count; ++i) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(m);
        switch (i % 3) {
        case 0: {
            double c[4];
            for (double& x : c) x = rng.normal();
            for (int j = 0; j < m; ++j) {
                const double r = mesh.nodes[std::size_t(j)];
                double s = 0.0;
                for (int l = 0; l < 4; ++l)
                    s += c[l] * std::cos((l + 0.5) * pi * r / R);
                v[j] = s;
            }
            break;
        }
        case 1: {
            const double rho = R * std::pow(10.0, -rng.uniform(1.0, 4.0));
            const double den = std::log(R / rho);
            for (int j = 0; j < m; ++j) {
                const double r = std::max(mesh.nodes[std::size_t(j)], rho);
                v[j] = std::min(1.0, std::log(R / r) / den);
            }
            break;
        }
        default: {
            const double beta = rng.uniform(0.25, 2.5);
            for (int j = 0; j < m; ++j) {
                const double r = mesh.nodes[std::size_t(j)];
                v[j] = (1.0 - r / R) * std::exp(-beta * r);
            }
            break;
        }
        }
        if (rng.uniform() < 0.5) v = -v;
        if (v.norm() > 0.0) out.push_back(v);
    }
    return out;
}

Eigen::VectorXd coeffs_of(const GridFunction& u) {
    const int m = int(u.values.size()) - 1;
    Eigen::VectorXd xi(m);
    for (int j = 0; j < m; ++j) xi[j] = u.values[std::size_t(j)];
    return xi;
}

SolveReport make_report(const Engine& eng, const Eigen::VectorXd& xi,
                        double residual, long evals, double cert_min) {
    SolveReport rep;
    rep.solution = eng.to_grid(xi);
    rep.residual = residual;
    rep.w1n = w1n_norm(rep.solution);
    rep.sup = 0.0;
    for (double v : rep.solution.values) rep.sup = std::max(rep.sup, std::abs(v));
    rep.iterations = evals;
    rep.certificate_min = cert_min;
    rep.positivity_min = std::numeric_limits<double>::infinity();
    for (int j = 0; j < eng.m; ++j)
        rep.positivity_min = std::min(rep.positivity_min, rep.solution.values[std::size_t(j)]);
    rep.lambda = eng.st.params.lambda;
    rep.R = eng.st.mesh->R;
    rep.strauss_k = eng.st.strauss_k;
    rep.reg_n = eng.st.reg_n;
    return rep;
}

} // namespace

// ---------------------------------------------------------------------------
// Public operations

Eigen::VectorXd assemble_F(const GalerkinState& state, const Eigen::VectorXd& xi) {
    Engine eng(state, nullptr, /*tabulate=*/false);
    return eng.assemble(xi);
}

double galerkin_norm(const GalerkinState& state, const Eigen::VectorXd& xi) {
    Engine eng(state, nullptr, /*tabulate=*/false);
    return eng.xi_norm(xi);
}

double dot_F_xi(const GalerkinState& state, const Eigen::VectorXd& xi) {
    Engine eng(state, nullptr, /*tabulate=*/false);
    return eng.assemble(xi).dot(xi);
}

SolveReport solve_PDn(const GalerkinState& state, double rho, double tol,
                      std::uint64_t seed,
                      const std::vector<Eigen::VectorXd>& warm, FkCache* cache) {
    if (!(rho > 0.0)) throw ParamError("solve_PDn: rho > 0 violated");
    if (!(tol > 0.0)) throw ParamError("solve_PDn: tol > 0 violated");
    Engine eng(state, cache, /*tabulate=*/true);
    FiniteField fld = eng.field(rho);

    auto probes = family_probes(*state.mesh, 24, seed);
    Certificate cert =
        certify_boundary(fld, 2 * eng.m + 64, seed, probes);
    if (!cert.passed)
        throw CertificateFailure(
            "solve_PDn: boundary certificate failed (lambda too large or n too small)",
            cert.min_value);

    long evals = 0;
    std::vector<Eigen::VectorXd> chain = warm;
    if (eng.N > 2) {
        // Continuation through the degenerate principal coefficient.
        for (double e : {1e-2, 1e-4, 1e-6}) {
            eng.eps = e;
            FiniteField stage = eng.field(rho);
            ZeroResult zs = find_zero(stage, std::max(tol, 1e-7), seed + 3, 4, chain);
            evals += zs.evals;
            if (zs.z.size() == Eigen::Index(eng.m)) chain = {zs.z};
        }
        eng.eps = 0.0;
    }
    ZeroResult zr = find_zero(fld, tol, seed + 1, 8, chain);
    evals += zr.evals;
    if (!zr.converged)
        throw BudgetExhausted("solve_PDn: zero search budget exhausted",
                              zr.residual);
    return make_report(eng, zr.z, zr.residual, evals, cert.min_value);
}

SolveReport solve_PD(const GalerkinState& state, const SolverConstants& sc,
                     double tol, std::uint64_t seed,
                     const std::vector<Eigen::VectorXd>& warm, FkCache* cache,
                     const std::vector<long>& schedule) {
    if (!(tol > 0.0)) throw ParamError("solve_PD: tol > 0 violated");
    if (!(state.params.lambda < sc.lambda_star) && state.params.lambda != 0.0)
        throw ParamError("solve_PD: lambda < lambda_star violated");
    if (schedule.empty())
        throw ParamError("solve_PD: schedule nonempty violated");
    for (std::size_t i = 0; i < schedule.size(); ++i)
        if (schedule[i] < 1 || (i > 0 && schedule[i] <= schedule[i - 1]))
            throw ParamError("solve_PD: schedule positive increasing violated");
    FkCache local;
    if (!cache) cache = &local;

    const double inner_tol = std::min(tol, 1e-9);

    // Exact-f system with the phi/n forcing dropped: the limit object the
    // schedule drives toward. Each regularized solution is polished onto it;
    // convergence is declared when the polished limit stops moving, which is
    // the n-independence the raw u_n gaps (dominated by the O(1/n) forcing
    // response) cannot express by n = 10^4.
    GalerkinState pol = state;
    pol.strauss_k = 0;
    pol.use_phi = false;
    Engine peng(pol, nullptr, /*tabulate=*/false);
    FiniteField pfld = peng.field(sc.rho);

    std::vector<Eigen::VectorXd> chain = warm;
    std::vector<double> raw_trace, limit_trace;
    bool have = false, converged = false;
    SolveReport last;
    Eigen::VectorXd prev_raw, prev_pol;
    long pol_evals = 0;
    ZeroResult pz;

    for (std::size_t i = 0; i < schedule.size(); ++i) {
        GalerkinState st = state;
        st.strauss_k = schedule[i];
        st.reg_n = schedule[i];
        SolveReport rep;
        try {
            rep = solve_PDn(st, sc.rho, inner_tol, seed + i, chain, cache);
        } catch (const CertificateFailure&) {
            if (i + 1 == schedule.size() && !have) throw;
            continue; // n too small for the certificate: escalate the schedule
        }
        Eigen::VectorXd xi = coeffs_of(rep.solution);
        ZeroResult zp = find_zero(pfld, tol, seed + 101 + i, 1, {xi});
        pol_evals += zp.evals;
        if (!zp.converged)
            throw BudgetExhausted("solve_PD: exact-f polish stalled", zp.residual);
        // Push past tol to the attainable floor so the limit gaps compare
        // points, not residual tubes.
        ZeroResult zf = find_zero(pfld, 1e-14, seed + 151 + i, 1, {zp.z});
        pol_evals += zf.evals;
        if (zf.residual < zp.residual) {
            zp.z = zf.z;
            zp.residual = zf.residual;
        }

        if (have) {
            raw_trace.push_back(peng.xi_norm(xi - prev_raw) /
                                std::max(rep.w1n, 1e-300));
            const double pol_norm = peng.xi_norm(zp.z);
            limit_trace.push_back(peng.xi_norm(zp.z - prev_pol) /
                                  std::max(pol_norm, 1e-300));
        }
        prev_raw = xi;
        prev_pol = zp.z;
        chain = {xi};
        last = rep;
        pz = zp;
        have = true;
        if (!limit_trace.empty() && limit_trace.back() < 1e-6) {
            converged = true;
            break;
        }
    }
    if (!have)
        throw CertificateFailure("solve_PD: no schedule step certified", 0.0);

    SolveReport rep = make_report(peng, pz.z, pz.residual,
                                  last.iterations + pol_evals,
                                  last.certificate_min);
    rep.strauss_k = last.strauss_k;
    rep.reg_n = last.reg_n;
    rep.schedule_converged = converged || limit_trace.empty();
    rep.cauchy_trace = raw_trace;
    rep.limit_trace = limit_trace;
    return rep;
}

GridFunction solve_sublinear(double b, const RadialMesh& mesh, int N, double q,
                             double tol, std::uint64_t seed) {
    if (!(b > 0.0)) throw ParamError("solve_sublinear: b > 0 violated");
    if (!(q > 1.0 && q < double(N)))
        throw ParamError("solve_sublinear: 1 < q < N violated");
    if (!(tol > 0.0)) throw ParamError("solve_sublinear: tol > 0 violated");
    if (mesh.N != N)
        throw ParamError("solve_sublinear: mesh dimension differs from N");

    // Left side reuses the assembly engine with every forcing switched off;
    // the concave right side is frozen per Picard sweep.
    GalerkinState st;
    st.mesh = &mesh;
    ProblemParams pp;
    pp.N = N;
    pp.q = q;
    pp.p = std::max(2.0 * N, q + double(N)) / 1.0; // inert: f-term is off
    pp.alpha = 1.0;
    pp.lambda = 0.0;
    st.params = pp;
    Nonlinearity dummy(FKind::canonical, pp);
    st.nl = &dummy;
    st.weight = Weight{};
    st.weight.kind = WeightKind::exponential;
    st.weight.gamma_or_rate = 1.0;
    st.weight.amplitude = 1.0;
    st.use_phi = false;
    st.use_f = false;
    Engine eng(st, nullptr, /*tabulate=*/false);

    const int m = eng.m;
    const double scale = std::pow(b, 1.0 / (double(N) - q));
    Eigen::VectorXd u(m);
    for (int j = 0; j < m; ++j)
        u[j] = scale * (1.0 - mesh.nodes[std::size_t(j)] / mesh.R);

    const double qm1 = q - 1.0;
    auto rhs_vec = [&](const Eigen::VectorXd& w) {
        Eigen::VectorXd r = Eigen::VectorXd::Zero(m);
        for (int e = 0; e < m; ++e) {
            const double ul = w[e];
            const double ur = (e + 1 < m) ? w[e + 1] : 0.0;
            for (int g = 0; g < 4; ++g) {
                const std::size_t iq = std::size_t(4 * e + g);
                const double t = eng.qt[iq];
                const double uq = ul + (ur - ul) * t;
                const double up = uq > 0.0 ? uq : 0.0;
                const double z = b * (up > 0.0 ? std::pow(up, qm1) : 0.0);
                const double wgt = eng.qwm[iq] * z;
                r[e] += wgt * (1.0 - t);
                if (e + 1 < m) r[e + 1] += wgt * t;
            }
        }
        return r;
    };

    const double radius = 100.0 * std::max(scale, eng.xi_norm(u));
    double gap = std::numeric_limits<double>::infinity();
    for (int sweep = 0; sweep < 80 && gap > std::min(tol, 1e-12); ++sweep) {
        Eigen::VectorXd rhs = rhs_vec(u);
        FiniteField fld;
        fld.dim = m;
        fld.radius = radius;
        fld.bandwidth = 1;
        fld.norm = [&eng](const Eigen::VectorXd& x) { return eng.xi_norm(x); };
        fld.eval = [&eng, &rhs](const Eigen::VectorXd& x) {
            return Eigen::VectorXd(eng.assemble(x) - rhs);
        };
        ZeroResult zr = find_zero(fld, std::min(tol, 1e-11), seed + sweep, 1, {u});
        if (!zr.converged)
            throw BudgetExhausted("solve_sublinear: inner solve stalled",
                                  zr.residual);
        gap = (zr.z - u).norm() / std::max(1.0, u.norm());
        u = zr.z;
    }

    // Self-consistent residual of the full nonlinear system.
    Eigen::VectorXd r_final = eng.assemble(u) - rhs_vec(u);
    if (r_final.norm() > std::max(tol, 1e-10) * std::max(1.0, u.norm()))
        throw BudgetExhausted("solve_sublinear: Picard sweeps did not settle",
                              r_final.norm());
    double umin = std::numeric_limits<double>::infinity();
    for (int j = 0; j < m; ++j) umin = std::min(umin, u[j]);
    if (!(umin > 0.0))
        throw BudgetExhausted("solve_sublinear: collapsed onto the trivial zero",
                              umin);
    return eng.to_grid(u);
}

bool comparison_check(const GridFunction& u1, const GridFunction& u2, double tol) {
    if (!u1.mesh || !u2.mesh) throw ParamError("comparison_check: missing mesh");
    if (u1.values.size() != u2.values.size())
        throw ParamError("comparison_check: mesh mismatch");
    const double R = std::max(u1.mesh->R, u2.mesh->R);
    for (std::size_t j = 0; j < u1.values.size(); ++j)
        if (std::abs(u1.mesh->nodes[j] - u2.mesh->nodes[j]) > 1e-12 * (1.0 + R))
            throw ParamError("comparison_check: mesh mismatch");
    for (std::size_t j = 0; j < u1.values.size(); ++j)
        if (!(u2.values[j] >= u1.values[j] - tol)) return false;
    return true;
}

ExhaustionReport ball_exhaustion(const GalerkinState& proto,
                                 const SolverConstants& sc,
                                 const std::vector<double>& R_list, double tol,
                                 double nodes_per_unit, std::uint64_t seed,
                                 FkCache* cache) {
    if (R_list.empty()) throw ParamError("ball_exhaustion: empty R_list");
    for (std::size_t i = 0; i + 1 < R_list.size(); ++i)
        if (!(R_list[i] < R_list[i + 1]))
            throw ParamError("ball_exhaustion: R_list not increasing");
    if (!(R_list.front() > 0.0))
        throw ParamError("ball_exhaustion: radii must be positive");
    if (!(nodes_per_unit >= 2.0))
        throw ParamError("ball_exhaustion: nodes_per_unit >= 2 violated");
    FkCache local;
    if (!cache) cache = &local;

    ExhaustionReport out;
    const int N = proto.params.N;
    for (std::size_t i = 0; i < R_list.size(); ++i) {
        const double R = R_list[i];
        const int M = std::max(48, int(std::lround(nodes_per_unit * R)));
        out.meshes.push_back(std::make_unique<RadialMesh>(build_mesh(R, M, N)));
        const RadialMesh& mesh = *out.meshes.back();

        GalerkinState st = proto;
        st.mesh = &mesh;
        st.phi_aux = default_phi_aux(mesh);

        std::vector<Eigen::VectorXd> warm;
        if (i > 0) {
            const GridFunction& prev = out.reports.back().solution;
            Eigen::VectorXd w(mesh.elements());
            for (int j = 0; j < mesh.elements(); ++j)
                w[j] = interp(prev, mesh.nodes[std::size_t(j)]);
            warm.push_back(w);
        }
        out.reports.push_back(
            solve_PD(st, sc, tol, seed + 17 * i, warm, cache));
    }

    const RadialMesh& window = *out.meshes.front();
    for (std::size_t i = 0; i + 1 < out.reports.size(); ++i) {
        GridFunction d;
        d.mesh = &window;
        d.values.resize(window.nodes.size());
        for (std::size_t j = 0; j < window.nodes.size(); ++j)
            d.values[j] = interp(out.reports[i + 1].solution, window.nodes[j]) -
                          interp(out.reports[i].solution, window.nodes[j]);
        out.window_diffs.push_back(w1n_norm(d));
    }

    const GridFunction& ulast = out.reports.back().solution;
    const double Rmax = R_list.back();
    for (int mm = 0; mm < int(std::floor(Rmax)); ++mm)
        out.annulus_sups.push_back(
            annulus_sup(ulast, double(mm), std::min(double(mm + 1), Rmax)));

    const double lam = proto.params.lambda;
    const double Nq = double(proto.params.N) - proto.params.q;
    const double decay =
        lam > 0.0 ? std::pow(2.0 * lam * sc.K1, 1.0 / Nq) : 0.0;
    out.rho_tilde = std::min(decay, sc.rho);
    out.norms_ok = true;
    for (const auto& rep : out.reports)
        if (!(rep.w1n <= out.rho_tilde * (1.0 + 1e-9) + 1e-12))
            out.norms_ok = false;
    return out;
}

SolverConstants estimate_constants(const RadialMesh& mesh, const Nonlinearity& nl,
                                   const ProblemParams& params,
                                   const Weight& weight,
                                   const GridFunction& phi_aux,
                                   double pbar_star, int samples,
                                   std::uint64_t seed) {
    validate_params(params);
    validate_weight(weight, params.N, params.q);
    if (mesh.N != params.N)
        throw ParamError("estimate_constants: mesh dimension differs from params.N");
    if (!(pbar_star > double(params.N)))
        throw ParamError("estimate_constants: pbar_star > N violated");
    if (samples < 8) throw ParamError("estimate_constants: samples >= 8 violated");

    const int N = params.N;
    const double q = params.q;
    const double p = params.p;
    const double npr = params.conjugate();
    const double aN = alpha_N(N);
    const double pi = std::acos(-1.0);
    const double R = mesh.R;
    const std::size_t nn = mesh.nodes.size();

    GridFunction phi = phi_aux;
    if (phi.values.empty()) phi = default_phi_aux(mesh);
    if (phi.values.size() != nn)
        throw ParamError("estimate_constants: phi_aux lives on a different mesh");

    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::vector<double>> profiles;
    profiles.reserve(std::size_t(samples));
    for (int i = 0; i < samples; ++i) {
        std::vector<double> v(nn, 0.0);
        switch (i % 4) {
        case 0: {
            double c[4];
            for (double& x : c) x = rng.normal();
            for (std::size_t j = 0; j + 1 < nn; ++j)
                for (int l = 0; l < 4; ++l)
                    v[j] += c[l] * std::cos((l + 0.5) * pi * mesh.nodes[j] / R);
            break;
        }
        case 1: {
            const std::size_t j =
                1 + std::size_t(rng.uniform() * double(nn - 2));
            v[std::min(j, nn - 2)] = 1.0;
            break;
        }
        case 2: {
            const double rho = R * std::pow(10.0, -rng.uniform(1.0, 4.0));
            const double den = std::log(R / rho);
            for (std::size_t j = 0; j + 1 < nn; ++j) {
                const double r = std::max(mesh.nodes[j], rho);
                v[j] = std::min(1.0, std::log(R / r) / den);
            }
            break;
        }
        default: {
            const double beta = rng.uniform(0.25, 2.5);
            for (std::size_t j = 0; j + 1 < nn; ++j)
                v[j] = (1.0 - mesh.nodes[j] / R) * std::exp(-beta * mesh.nodes[j]);
            break;
        }
        }
        GridFunction g;
        g.mesh = &mesh;
        g.values = v;
        const double norm = w1n_norm(g);
        if (!(norm > 0.0) || !std::isfinite(norm)) continue;
        for (double& x : v) x /= norm;
        profiles.push_back(std::move(v));
    }
    if (profiles.size() < 4)
        throw QuadratureError("estimate_constants: profile generation degenerated",
                              double(profiles.size()));

    // Per-qp caches shared by every ratio.
    const std::size_t Q = mesh.qp_r.size();
    std::vector<double> qa(Q), qphi(Q), qt(Q), qwm(Q);
    for (int e = 0; e < mesh.elements(); ++e) {
        const double h = mesh.h(e);
        for (int gq = 0; gq < 4; ++gq) {
            const std::size_t iq = std::size_t(4 * e + gq);
            qt[iq] = (mesh.qp_r[iq] - mesh.nodes[std::size_t(e)]) / h;
            qwm[iq] = mesh.omega * mesh.qp_rmeas[iq];
            qa[iq] = weight_eval(weight, mesh.qp_r[iq]);
            qphi[iq] = phi.values[std::size_t(e)] +
                       (phi.values[std::size_t(e) + 1] - phi.values[std::size_t(e)]) *
                           qt[iq];
        }
    }

    // omega int g(v, a, phi) r^{N-1} dr over the mesh quadrature.
    auto integrate = [&](const std::vector<double>& vals, auto&& g) {
        double acc = 0.0;
        for (int e = 0; e < mesh.elements(); ++e) {
            const double vl = vals[std::size_t(e)], vr = vals[std::size_t(e) + 1];
            for (int gq = 0; gq < 4; ++gq) {
                const std::size_t iq = std::size_t(4 * e + gq);
                const double u = vl + (vr - vl) * qt[iq];
                acc += qwm[iq] * g(u, qa[iq], qphi[iq]);
            }
        }
        return acc;
    };

    SolverConstants sc;
    sc.K1 = 0.0;
    sc.K3 = 0.0;
    sc.C_alphaN = 0.0;
    sc.C_star = 0.0;
    for (const auto& v : profiles) {
        sc.K1 = std::max(sc.K1, integrate(v, [&](double u, double a, double) {
                             return u > 0.0 ? a * std::pow(u, q) : 0.0;
                         }));
        sc.K3 = std::max(sc.K3, integrate(v, [&](double u, double, double ph) {
                             return ph * std::abs(u);
                         }));
        GridFunction g;
        g.mesh = &mesh;
        g.values = v;
        sc.C_star = std::max(sc.C_star, ls_norm(g, pbar_star));
        try {
            sc.C_alphaN =
                std::max(sc.C_alphaN, std::pow(tm_functional(g, aN), 1.0 / npr));
        } catch (const RangeError&) {
            // concentration overran the exponential: skip this probe
        }
    }
    if (!(sc.C_alphaN > 0.0))
        throw QuadratureError(
            "estimate_constants: every concentration probe overflowed", 0.0);

    // Growth-envelope ratio at the Trudinger-Moser calibration scale.
    const double s0 =
        0.25 * std::pow(aN / (double(N) * params.alpha),
                        (double(N) - 1.0) / double(N));
    const double C1 = nl.params().a1 * std::pow(2.0, nl.params().p);
    const double two_np = std::pow(2.0, npr);
    sc.K2 = 0.0;
    for (const auto& v : profiles) {
        try {
            const double val = integrate(v, [&](double u, double, double) {
                const double up = u > 0.0 ? s0 * u : 0.0;
                if (up <= 0.0) return 0.0;
                const double arg = two_np * params.alpha * std::pow(up, npr);
                if (arg > 709.78)
                    throw RangeError("estimate_constants: envelope overflow", arg);
                return C1 * std::pow(up, p) * phi_n(N, arg);
            });
            sc.K2 = std::max(sc.K2, val / (sc.C_alphaN * std::pow(s0, p)));
        } catch (const RangeError&) {
        }
    }

    if (!(sc.K1 > 0.0) || !(sc.K2 > 0.0) || !(sc.K3 > 0.0) || !(sc.C_star > 0.0))
        throw QuadratureError("estimate_constants: a ratio degenerated to zero",
                              0.0);
    return compute_rho_lambda_star(params, sc);
}

} // namespace nlap
