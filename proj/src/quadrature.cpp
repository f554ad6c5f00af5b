#include "nlap/quadrature.hpp"
#include "nlap/errors.hpp"

#include <cmath>
#include <vector>

namespace nlap {
namespace {

// Gauss-Kronrod 7/15 pair on [-1,1]; the 7-point Gauss rule is embedded at
// the odd Kronrod abscissae.
constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0};
constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

struct Panel {
    double a, b;
    double k15, err;
};

void eval_panel(const std::function<double(double)>& f, Panel& p) {
    const double c = 0.5 * (p.a + p.b);
    const double h = 0.5 * (p.b - p.a);
    const double fc = f(c);
    double k15 = kWgk[7] * fc;
    double g7 = kWg[3] * fc;
    for (int j = 0; j < 7; ++j) {
        const double x = h * kXgk[j];
        const double v = f(c - x) + f(c + x);
        k15 += kWgk[j] * v;
        if (j % 2 == 1) g7 += kWg[j / 2] * v;
    }
    p.k15 = k15 * h;
    p.err = std::abs((k15 - g7) * h);
}

} // namespace

QuadResult integrate_adaptive(const std::function<double(double)>& f,
                              double a, double b,
                              double abs_tol, double rel_tol, int max_panels) {
    QuadResult res{0.0, 0.0, 0, true};
    if (a == b) return res;

    std::vector<Panel> work;
    work.push_back({a, b, 0.0, 0.0});
    eval_panel(f, work.back());
    res.evals = 15;

    std::vector<Panel> done;
    int panels = 1;
    while (!work.empty()) {
        // Split the panel with the largest error estimate.
        std::size_t worst = 0;
        for (std::size_t i = 1; i < work.size(); ++i)
            if (work[i].err > work[worst].err) worst = i;

        double total = 0.0, total_err = 0.0;
        for (const Panel& p : work) { total += p.k15; total_err += p.err; }
        for (const Panel& p : done) { total += p.k15; total_err += p.err; }
        if (total_err <= std::max(abs_tol, rel_tol * std::abs(total))) {
            res.value = total;
            res.error = total_err;
            return res;
        }
        if (panels >= max_panels) {
            throw QuadratureError("adaptive quadrature: panel budget exhausted",
                                  total_err);
        }

        Panel p = work[worst];
        work.erase(work.begin() + static_cast<long>(worst));
        const double mid = 0.5 * (p.a + p.b);
        Panel left{p.a, mid, 0.0, 0.0}, right{mid, p.b, 0.0, 0.0};
        eval_panel(f, left);
        eval_panel(f, right);
        res.evals += 30;
        panels += 1;
        // Panels at roundoff width cannot be refined further; freeze them.
        if (mid <= p.a || mid >= p.b) {
            done.push_back(p);
        } else {
            work.push_back(left);
            work.push_back(right);
        }
    }
    double total = 0.0, total_err = 0.0;
    for (const Panel& p : done) { total += p.k15; total_err += p.err; }
    res.value = total;
    res.error = total_err;
    return res;
}

} // namespace nlap
