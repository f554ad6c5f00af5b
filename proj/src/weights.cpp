#include "nlap/weights.hpp"

#include "nlap/errors.hpp"
#include "nlap/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace nlap {

namespace {
const double kPi = 3.14159265358979323846;
const double kTailStart = 1e4;

double sphere_area_local(int N) { // omega_{N-1} = 2 pi^{N/2} / Gamma(N/2)
    return 2.0 * std::pow(kPi, 0.5 * N) / std::tgamma(0.5 * N);
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

// int_0^{1e4} a(r)^m r^{N-1} dr. Split at powers of ten: one panel over the
// whole range hides the decaying weight's mass near the origin from the
// quadrature nodes entirely.
double head_integral(const Weight& w, double m, int N, double tol) {
    static const double cuts[] = {0.0, 1.0, 10.0, 100.0, 1000.0, kTailStart};
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < sizeof(cuts) / sizeof(cuts[0]); ++i)
        acc += integrate_adaptive(
                   [&](double r) {
                       return std::pow(weight_eval(w, r), m) * std::pow(r, N - 1);
                   },
                   cuts[i], cuts[i + 1], tol, tol, 8000)
                   .value;
    return acc;
}

// int_T^inf a(r)^m r^{N-1} dr bounded in closed form; integrand must already
// be decreasing at T (true for T = 1e4 and the parameter windows we accept).
double tail_bound(const Weight& w, double m, int N) {
    const double T = kTailStart;
    switch (w.kind) {
        case WeightKind::power_decay: {
            // (1+r)^{-gamma m} <= r^{-gamma m} for r >= 1
            const double e = w.gamma_or_rate * m - double(N);
            if (e <= 0.0) return std::numeric_limits<double>::infinity();
            return std::pow(w.amplitude, m) * std::pow(T, -e) / e;
        }
        case WeightKind::exponential:
        case WeightKind::constant_on_ball: {
            // int_T^inf r^{N-1} e^{-cr} dr <= 2 T^{N-1} e^{-cT} / c once
            // cT >= 2(N-1); with T = 1e4 any rate we accept satisfies that.
            double c = w.gamma_or_rate * m;
            double shift = (w.kind == WeightKind::constant_on_ball) ? 1.0 : 0.0;
            double logv = m * std::log(w.amplitude) - c * (T - shift) +
                          double(N - 1) * std::log(T) + std::log(2.0 / c);
            return logv < -700.0 ? 0.0 : std::exp(logv);
        }
    }
    return std::numeric_limits<double>::infinity();
}
} // namespace

WeightKind weight_kind_from_string(const std::string& s) {
    if (s == "power-decay") return WeightKind::power_decay;
    if (s == "exponential") return WeightKind::exponential;
    if (s == "constant-on-ball") return WeightKind::constant_on_ball;
    throw ParamError("unknown weight kind: " + s);
}

std::string to_string(WeightKind k) {
    switch (k) {
        case WeightKind::power_decay: return "power-decay";
        case WeightKind::exponential: return "exponential";
        case WeightKind::constant_on_ball: return "constant-on-ball";
    }
    return "?";
}

double weight_eval(const Weight& w, double r) {
    if (r < 0.0) throw DomainError("weight_eval: r>=0 violated, r=" + fmt(r));
    switch (w.kind) {
        case WeightKind::power_decay:
            return w.amplitude * std::pow(1.0 + r, -w.gamma_or_rate);
        case WeightKind::exponential:
            return w.amplitude * std::exp(-w.gamma_or_rate * r);
        case WeightKind::constant_on_ball:
            return r <= 1.0 ? w.amplitude
                            : w.amplitude * std::exp(-w.gamma_or_rate * (r - 1.0));
    }
    return 0.0;
}

void validate_weight(const Weight& w, int N, double q) {
    if (!(w.amplitude > 0.0))
        throw ParamError("weight amplitude>0 violated: " + fmt(w.amplitude));
    if (!(w.gamma_or_rate > 0.0))
        throw ParamError("weight rate/gamma>0 violated: " + fmt(w.gamma_or_rate));
    const double m = double(N) / (double(N) - q);
    if (w.kind == WeightKind::power_decay && !(w.gamma_or_rate > double(N) - q))
        throw ParamError("power weight integrability gamma > N-q violated: gamma=" +
                         fmt(w.gamma_or_rate) + ", N-q=" + fmt(double(N) - q));
    double total = head_integral(w, m, N, 1e-10) + tail_bound(w, m, N);
    if (!std::isfinite(total))
        throw ParamError("weight not in L^{N/(N-q)}: integral diverges");
}

double weight_inf_on_ball(const Weight& w, double R) {
    if (!(R > 0.0)) throw ParamError("weight_inf_on_ball: R>0 violated");
    return weight_eval(w, R); // all kinds nonincreasing in r
}

double weight_grid_min(const Weight& w, double R, int n_cells) {
    if (n_cells < 1) throw ParamError("weight_grid_min: n_cells>=1 violated");
    static const double gx[4] = {-0.8611363115940526, -0.3399810435848563,
                                 0.3399810435848563, 0.8611363115940526};
    double best = std::min(weight_eval(w, 0.0), weight_eval(w, R));
    const double h = R / double(n_cells);
    for (int c = 0; c < n_cells; ++c) {
        const double mid = (double(c) + 0.5) * h;
        for (double g : gx) best = std::min(best, weight_eval(w, mid + 0.5 * h * g));
    }
    return best;
}

double weight_lnq_norm(const Weight& w, int N, double q) {
    const double m = double(N) / (double(N) - q);
    double total = sphere_area_local(N) * (head_integral(w, m, N, 1e-12) + tail_bound(w, m, N));
    return std::pow(total, 1.0 / m);
}

} // namespace nlap
