#include "nlap/brouwer.hpp"

#include "nlap/errors.hpp"
#include "nlap/rng.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <limits>

namespace nlap {

namespace {

Eigen::VectorXd to_sphere(const FiniteField& field, Eigen::VectorXd v) {
    double n = field.norm(v);
    if (!(n > 0.0)) throw ParamError("certify_boundary: zero-norm sample direction");
    return v * (field.radius / n);
}

void check_norm_axioms(const FiniteField& field, Rng& rng) {
    const int d = field.dim;
    for (int trial = 0; trial < 4; ++trial) {
        Eigen::VectorXd x(d), y(d);
        for (int i = 0; i < d; ++i) { x[i] = rng.normal(); y[i] = rng.normal(); }
        const double nx = field.norm(x), ny = field.norm(y);
        const double slack = 1e-9 * (nx + ny + 1.0);
        if (field.norm(x + y) > nx + ny + slack)
            throw ParamError("field norm violates the triangle inequality on a sampled pair");
        const double c = 0.25 + 3.0 * rng.uniform();
        if (std::abs(field.norm(c * x) - c * nx) > slack * (1.0 + c))
            throw ParamError("field norm violates absolute homogeneity on a sample");
    }
}

// Forward-difference Jacobian. Banded fields perturb every (2b+1)-th
// coordinate at once, so the cost is 2b+1 evaluations instead of d.
void fd_jacobian(const FiniteField& field, const Eigen::VectorXd& x,
                 const Eigen::VectorXd& Fx, Eigen::MatrixXd& Jdense,
                 Eigen::SparseMatrix<double>& Jsparse, bool banded, long& evals) {
    const int d = field.dim;
    auto step = [&](int j) { return std::max(1e-7, 1e-7 * std::abs(x[j])); };
    if (!banded) {
        Jdense.resize(d, d);
        Eigen::VectorXd xp = x;
        for (int j = 0; j < d; ++j) {
            const double h = step(j);
            xp[j] = x[j] + h;
            Eigen::VectorXd Fp = field.eval(xp);
            ++evals;
            Jdense.col(j) = (Fp - Fx) / h;
            xp[j] = x[j];
        }
        return;
    }
    const int b = field.bandwidth;
    const int stride = 2 * b + 1;
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(std::size_t(d) * std::size_t(stride));
    Eigen::VectorXd xp = x;
    for (int color = 0; color < stride && color < d; ++color) {
        for (int j = color; j < d; j += stride) xp[j] = x[j] + step(j);
        Eigen::VectorXd Fp = field.eval(xp);
        ++evals;
        for (int j = color; j < d; j += stride) {
            const double h = step(j);
            for (int i = std::max(0, j - b); i <= std::min(d - 1, j + b); ++i)
                trips.emplace_back(i, j, (Fp[i] - Fx[i]) / h);
            xp[j] = x[j];
        }
    }
    Jsparse.resize(d, d);
    Jsparse.setFromTriplets(trips.begin(), trips.end());
}

struct LocalSearch {
    const FiniteField& field;
    double tol;
    long evals = 0;
    long max_evals;

    Eigen::VectorXd best_x;
    double best_res = std::numeric_limits<double>::infinity();

    explicit LocalSearch(const FiniteField& f, double t, long budget)
        : field(f), tol(t), max_evals(budget) {}

    Eigen::VectorXd F(const Eigen::VectorXd& x) {
        ++evals;
        Eigen::VectorXd v = field.eval(x);
        const double r = v.norm();
        if (r < best_res) { best_res = r; best_x = x; }
        return v;
    }

    Eigen::VectorXd clamp_to_ball(Eigen::VectorXd x) const {
        const double n = field.norm(x);
        if (n > field.radius) x *= field.radius / n;
        return x;
    }

    // Damped Newton; returns true on residual <= tol.
    bool newton(Eigen::VectorXd x) {
        const bool banded = field.bandwidth >= 0 && field.dim > 4;
        Eigen::MatrixXd Jd;
        Eigen::SparseMatrix<double> Js;
        Eigen::VectorXd Fx = F(x);
        for (int it = 0; it < 60 && evals < max_evals; ++it) {
            if (Fx.norm() <= tol) return true;
            fd_jacobian(field, x, Fx, Jd, Js, banded, evals);
            Eigen::VectorXd delta;
            if (banded) {
                Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
                lu.compute(Js);
                if (lu.info() != Eigen::Success) return false;
                delta = lu.solve(-Fx);
            } else {
                delta = Jd.partialPivLu().solve(-Fx);
            }
            if (!delta.allFinite()) return false;
            const double f0 = Fx.squaredNorm();
            double a = 1.0;
            bool accepted = false;
            for (int half = 0; half < 24 && evals < max_evals; ++half, a *= 0.5) {
                Eigen::VectorXd xt = clamp_to_ball(x + a * delta);
                Eigen::VectorXd Ft = F(xt);
                if (Ft.squaredNorm() <= (1.0 - 1e-4 * a) * f0) {
                    x = std::move(xt);
                    Fx = std::move(Ft);
                    accepted = true;
                    break;
                }
                if (Ft.norm() <= tol) { return true; }
            }
            if (!accepted) return Fx.norm() <= tol;
        }
        return Fx.norm() <= tol;
    }

    // Levenberg-Marquardt on |F|^2/2 with Marquardt diagonal scaling, which
    // keeps the path invariant under F -> c F.
    bool lm(Eigen::VectorXd x) {
        const bool banded = field.bandwidth >= 0 && field.dim > 4;
        Eigen::MatrixXd Jd;
        Eigen::SparseMatrix<double> Js;
        Eigen::VectorXd Fx = F(x);
        double mu_rel = 1e-3;
        for (int it = 0; it < 80 && evals < max_evals; ++it) {
            if (Fx.norm() <= tol) return true;
            fd_jacobian(field, x, Fx, Jd, Js, banded, evals);
            bool stepped = false;
            for (int tries = 0; tries < 12 && evals < max_evals; ++tries) {
                Eigen::VectorXd delta;
                if (banded) {
                    Eigen::SparseMatrix<double> A = Eigen::SparseMatrix<double>(Js.transpose()) * Js;
                    double dmax = 0.0;
                    for (int i = 0; i < A.rows(); ++i) dmax = std::max(dmax, A.coeff(i, i));
                    if (!(dmax > 0.0)) dmax = 1.0;
                    Eigen::SparseMatrix<double> I(A.rows(), A.cols());
                    I.setIdentity();
                    A = A + (mu_rel * dmax) * I;
                    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
                    ldlt.compute(A);
                    if (ldlt.info() != Eigen::Success) { mu_rel *= 3.0; continue; }
                    delta = ldlt.solve(-(Js.transpose() * Fx));
                } else {
                    Eigen::MatrixXd A = Jd.transpose() * Jd;
                    double dmax = A.diagonal().maxCoeff();
                    if (!(dmax > 0.0)) dmax = 1.0;
                    A.diagonal().array() += mu_rel * dmax;
                    delta = A.ldlt().solve(-(Jd.transpose() * Fx));
                }
                if (!delta.allFinite()) { mu_rel *= 3.0; continue; }
                Eigen::VectorXd xt = clamp_to_ball(x + delta);
                Eigen::VectorXd Ft = F(xt);
                if (Ft.squaredNorm() < Fx.squaredNorm()) {
                    x = std::move(xt);
                    Fx = std::move(Ft);
                    mu_rel = std::max(1e-12, mu_rel * 0.3);
                    stepped = true;
                    break;
                }
                mu_rel *= 3.0;
            }
            if (!stepped) return Fx.norm() <= tol;
        }
        return Fx.norm() <= tol;
    }
};

} // namespace

Certificate certify_boundary(const FiniteField& field, int samples,
                             std::uint64_t seed,
                             const std::vector<Eigen::VectorXd>& extra) {
    if (field.dim < 1) throw ParamError("certify_boundary: dim>=1 violated");
    if (samples < 2 * field.dim)
        throw ParamError("certify_boundary: samples >= 2*dim violated");
    if (!(field.radius > 0.0)) throw ParamError("certify_boundary: radius>0 violated");
    Rng rng(seed ^ 0x6210398570193853ULL);
    check_norm_axioms(field, rng);

    Certificate cert;
    cert.min_value = std::numeric_limits<double>::infinity();
    const int d = field.dim;
    int produced = 0;
    auto visit = [&](const Eigen::VectorXd& dir) {
        Eigen::VectorXd xi = to_sphere(field, dir);
        const double v = field.eval(xi).dot(xi);
        if (v < cert.min_value) {
            cert.min_value = v;
            cert.argmin = xi;
        }
        ++produced;
    };
    for (int j = 0; j < d; ++j) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
        e[j] = 1.0;
        visit(e);
        e[j] = -1.0;
        visit(e);
    }
    while (produced < samples) {
        Eigen::VectorXd v(d);
        for (int i = 0; i < d; ++i) v[i] = rng.normal();
        visit(v);
    }
    for (const auto& p : extra)
        if (p.size() == d && field.norm(p) > 0.0) visit(p);
    cert.passed = cert.min_value >= 0.0;
    return cert;
}

ZeroResult find_zero(const FiniteField& field, double tol,
                     std::uint64_t seed, int max_starts,
                     const std::vector<Eigen::VectorXd>& warm) {
    if (field.dim < 1) throw ParamError("find_zero: dim>=1 violated");
    if (!(tol > 0.0)) throw ParamError("find_zero: tol>0 violated");
    const int d = field.dim;
    Rng rng(seed ^ 0x51a9c04790134cb7ULL);

    // Per-start budget grows with dimension; banded Jacobians are cheap.
    const bool banded = field.bandwidth >= 0 && d > 4;
    const long budget = banded ? 4000 : std::max(2000L, 200L * d);

    LocalSearch search(field, tol, budget);
    ZeroResult out;

    std::vector<Eigen::VectorXd> starts;
    for (const auto& w : warm) {
        if (w.size() != d) throw ParamError("find_zero: warm start has wrong dimension");
        double n = field.norm(w);
        starts.push_back(n > field.radius ? Eigen::VectorXd(w * (field.radius / n))
                                          : w);
        if (int(starts.size()) >= max_starts) break;
    }
    if (int(starts.size()) < max_starts)
        starts.push_back(Eigen::VectorXd::Zero(d));
    while (int(starts.size()) < max_starts) {
        Eigen::VectorXd v(d);
        for (int i = 0; i < d; ++i) v[i] = rng.normal();
        double n = field.norm(v);
        if (!(n > 0.0)) continue;
        starts.push_back(v * (0.5 * field.radius / n));
        if (int(starts.size()) < max_starts) starts.push_back(-starts.back());
    }

    for (const auto& s : starts) {
        ++out.starts_used;
        search.max_evals = search.evals + budget;
        bool ok = search.newton(s);
        if (!ok && search.best_res > tol) {
            search.max_evals = search.evals + budget;
            ok = search.lm(search.best_res < std::numeric_limits<double>::infinity()
                               ? search.best_x
                               : s);
        }
        if (ok || search.best_res <= tol) {
            out.z = search.best_x;
            out.residual = search.best_res;
            out.converged = true;
            out.evals = search.evals;
            return out;
        }
    }
    out.z = search.best_x.size() ? search.best_x : Eigen::VectorXd::Zero(d);
    out.residual = search.best_res;
    out.converged = false;
    out.evals = search.evals;
    return out;
}

} // namespace nlap
