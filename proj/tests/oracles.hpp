// Independent re-derivations used to cross-check the library. Everything in
// here is deliberately implemented with different algorithms than src/:
// composite Simpson instead of adaptive Gauss-Kronrod, ODE shooting instead
// of Rayleigh minimization, zoomed grid search instead of damped Newton.
#ifndef NLAP_TEST_ORACLES_HPP
#define NLAP_TEST_ORACLES_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>

namespace oracle {

// Composite Simpson on n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a,
                      double b, int n) {
    if (n % 2) ++n;
    double h = (b - a) / n, s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

// Recursive adaptive Simpson with Richardson acceptance.
inline double adaptive_simpson_rec(const std::function<double(double)>& f,
                                   double a, double b, double fa, double fm,
                                   double fb, double whole, double tol,
                                   int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f,
                               double a, double b, double tol) {
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

// Closed-form primitive of the canonical nonlinearity at N=2, p=4, alpha=1:
// integrating s^3(e^{s^2}-1) gives ((t^2-1)e^{t^2}+1)/2 - t^4/4.
inline double G_closed_n2p4(double t) {
    double t2 = t * t;
    return ((t2 - 1.0) * std::exp(t2) + 1.0) / 2.0 - t2 * t2 / 4.0;
}

// First Dirichlet eigenvalue of the radial N-Laplacian on B_R by shooting:
// integrate u' = sign(w)|w/r^{N-1}|^{1/(N-1)}, w' = -sigma r^{N-1}|u|^{N-2}u
// from u(0)=1 and bisect sigma on the sign of u(R).
inline double shoot_u_at_R(double sigma, int N, double R) {
    const int steps = 4000;
    double r = 1e-8, u = 1.0, w = -sigma * std::pow(r, N) / N;
    double h = (R - r) / steps;
    auto du = [&](double rr, double ww) {
        double v = ww / std::pow(rr, N - 1);
        return (v >= 0 ? 1.0 : -1.0) * std::pow(std::fabs(v), 1.0 / (N - 1));
    };
    auto dw = [&](double rr, double uu) {
        return -sigma * std::pow(rr, N - 1) * std::pow(std::fabs(uu), N - 2) * uu;
    };
    for (int i = 0; i < steps; ++i) {
        double k1u = du(r, w), k1w = dw(r, u);
        double k2u = du(r + h / 2, w + h / 2 * k1w), k2w = dw(r + h / 2, u + h / 2 * k1u);
        double k3u = du(r + h / 2, w + h / 2 * k2w), k3w = dw(r + h / 2, u + h / 2 * k2u);
        double k4u = du(r + h, w + h * k3w), k4w = dw(r + h, u + h * k3u);
        u += h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u);
        w += h / 6 * (k1w + 2 * k2w + 2 * k3w + k4w);
        r += h;
        if (u < 0) return u - (R - r); // crossed early, keep it negative
    }
    return u;
}

inline double sigma1_shooting(int N, double R) {
    double lo = 1e-3, hi = 1.0;
    while (shoot_u_at_R(hi, N, R) > 0) { lo = hi; hi *= 2; }
    for (int i = 0; i < 100; ++i) {
        double mid = 0.5 * (lo + hi);
        (shoot_u_at_R(mid, N, R) > 0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Zero of a planar field inside the |.|_2-ball by zoomed grid search. Only
// uses |F| evaluations, so it is independent of the Newton machinery. The
// field must have a unique zero for the zoom to be meaningful.
inline Eigen::Vector2d grid_zero_2d(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& F,
    double radius) {
    double cx = 0, cy = 0, span = radius;
    for (int level = 0; level < 8; ++level) {
        double best = 1e300, bx = cx, by = cy;
        for (int i = -50; i <= 50; ++i)
            for (int j = -50; j <= 50; ++j) {
                Eigen::VectorXd x(2);
                x[0] = cx + span * i / 50.0;
                x[1] = cy + span * j / 50.0;
                if (x.norm() > radius) continue;
                double v = F(x).norm();
                if (v < best) { best = v; bx = x[0]; by = x[1]; }
            }
        cx = bx; cy = by; span /= 25.0;
    }
    return {cx, cy};
}

// Direct q-Pochhammer style product prod_{k=2}^{kmax} (1 - P^k)^{-1}.
inline double q_product_direct(double P, int kmax) {
    double prod = 1.0;
    for (int k = 2; k <= kmax; ++k) prod /= 1.0 - std::pow(P, k);
    return prod;
}

// Portable deterministic rng for test data (splitmix64).
struct TestRng {
    std::uint64_t s;
    explicit TestRng(std::uint64_t seed) : s(seed) {}
    std::uint64_t next() {
        s += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = s;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double uniform() { return double(next() >> 11) * 0x1.0p-53; }
    double sym() { return 2.0 * uniform() - 1.0; }
};

} // namespace oracle

#endif
