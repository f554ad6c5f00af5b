#include "nlap/nonlinearity.hpp"

#include "nlap/errors.hpp"
#include "nlap/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace nlap {

namespace {
constexpr double kLogDblMax = 709.782712893384;

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}
} // namespace

void validate_params(const ProblemParams& p) {
    if (p.N < 2) throw ParamError("N>=2 violated: N=" + std::to_string(p.N));
    if (!(p.q > 1.0 && p.q < double(p.N)))
        throw ParamError("1<q<N violated: q=" + fmt(p.q) + ", N=" + std::to_string(p.N));
    if (!(p.p > double(p.N)))
        throw ParamError("N<p violated: p=" + fmt(p.p) + ", N=" + std::to_string(p.N));
    if (!(p.alpha > 0.0)) throw ParamError("alpha>0 violated: alpha=" + fmt(p.alpha));
    if (!(p.a1 > 0.0)) throw ParamError("a1>0 violated: a1=" + fmt(p.a1));
    if (!(p.lambda >= 0.0)) throw ParamError("lambda>=0 violated: lambda=" + fmt(p.lambda));
}

double phi_n(int n, double t) {
    if (t < 0.0) throw DomainError("phi_n: t>=0 violated, t=" + fmt(t));
    if (!(t <= kLogDblMax))
        throw RangeError("phi_n: e^t exceeds double range at t=" + fmt(t), t);
    if (n <= 1) return std::exp(t);

    if (t < double(n)) {
        // Tail series sum_{j>=n-1} t^j/j!; all terms positive, no cancellation.
        double term = 1.0;
        for (int j = 1; j <= n - 1; ++j) term *= t / double(j);
        double sum = term;
        for (int j = n; term > sum * 1e-18 && j < 100000; ++j) {
            term *= t / double(j);
            sum += term;
        }
        return sum;
    }
    double partial = 1.0, term = 1.0;
    for (int j = 1; j <= n - 2; ++j) {
        term *= t / double(j);
        partial += term;
    }
    return std::exp(t) - partial;
}

double log_phi_n(int n, double t) {
    if (t < 0.0) throw DomainError("log_phi_n: t>=0 violated, t=" + fmt(t));
    if (t <= 700.0) {
        double v = phi_n(n, t);
        return v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity();
    }
    if (n <= 1) return t;
    // ln(e^t - S) = t + log1p(-S e^{-t}) with S the removed partial sum.
    double log_term = 0.0, log_S = 0.0; // log of running term / running sum
    for (int j = 1; j <= n - 2; ++j) {
        log_term += std::log(t / double(j));
        log_S = std::max(log_S, log_term) +
                std::log1p(std::exp(-std::abs(log_S - log_term)));
    }
    double corr = std::exp(log_S - t); // S e^{-t}, underflows to 0 for t >> n
    return t + std::log1p(-corr);
}

FKind fkind_from_string(const std::string& s) {
    if (s == "canonical") return FKind::canonical;
    if (s == "sine-modulated") return FKind::sine_modulated;
    if (s == "positive-part-sine") return FKind::positive_part_sine;
    if (s == "custom-tabulated") return FKind::custom_tabulated;
    throw ParamError("unknown nonlinearity kind: " + s);
}

std::string to_string(FKind k) {
    switch (k) {
        case FKind::canonical: return "canonical";
        case FKind::sine_modulated: return "sine-modulated";
        case FKind::positive_part_sine: return "positive-part-sine";
        case FKind::custom_tabulated: return "custom-tabulated";
    }
    return "?";
}

Nonlinearity::Nonlinearity(FKind kind, const ProblemParams& params)
    : kind_(kind), params_(params) {
    validate_params(params);
    if (kind == FKind::custom_tabulated)
        throw ParamError("custom-tabulated kind requires samples");
}

Nonlinearity::Nonlinearity(const ProblemParams& params,
                           std::vector<double> sample_t, std::vector<double> sample_f)
    : kind_(FKind::custom_tabulated), params_(params),
      tab_t_(std::move(sample_t)), tab_f_(std::move(sample_f)) {
    validate_params(params);
    const std::size_t n = tab_t_.size();
    if (n < 2 || tab_f_.size() != n)
        throw ParamError("custom-tabulated: need >=2 samples with matching lengths");
    bool has_zero = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (i + 1 < n && !(tab_t_[i] < tab_t_[i + 1]))
            throw ParamError("custom-tabulated: sample abscissae must be strictly increasing");
        if (tab_t_[i] * tab_f_[i] < 0.0)
            throw ParamError("custom-tabulated: sign condition t*f(t)>=0 violated at t=" +
                             fmt(tab_t_[i]));
        if (tab_t_[i] == 0.0 && tab_f_[i] == 0.0) has_zero = true;
    }
    if (!has_zero) throw ParamError("custom-tabulated: samples must include (0,0)");

    // Fritsch-Carlson slopes: monotone on monotone data, flat at extrema.
    tab_d_.assign(n, 0.0);
    std::vector<double> h(n - 1), delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = tab_t_[i + 1] - tab_t_[i];
        delta[i] = (tab_f_[i + 1] - tab_f_[i]) / h[i];
    }
    if (n == 2) {
        tab_d_[0] = tab_d_[1] = delta[0];
    } else {
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (delta[i - 1] * delta[i] <= 0.0) {
                tab_d_[i] = 0.0;
            } else {
                double w1 = 2.0 * h[i] + h[i - 1];
                double w2 = h[i] + 2.0 * h[i - 1];
                tab_d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        auto end_slope = [](double h0, double h1, double d0, double d1) {
            double d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
            if (d * d0 <= 0.0) return 0.0;
            if (d0 * d1 < 0.0 && std::abs(d) > 3.0 * std::abs(d0)) return 3.0 * d0;
            return d;
        };
        tab_d_[0] = end_slope(h[0], h[1], delta[0], delta[1]);
        tab_d_[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    }

    // Probe the interpolant: load-time enforcement of t*f(t) >= 0.
    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (int j = 1; j < 16; ++j) {
            double t = tab_t_[i] + h[i] * (double(j) / 16.0);
            if (t * f(t) < -1e-12 * (1.0 + std::abs(tab_f_[i]) + std::abs(tab_f_[i + 1])))
                throw ParamError("custom-tabulated: interpolant violates t*f(t)>=0 near t=" +
                                 fmt(t));
        }
    }
}

double Nonlinearity::f_canonical_family(double t) const {
    if (t == 0.0) return 0.0;
    const double x = std::abs(t);
    const double np = params_.conjugate();
    const double arg = params_.alpha * std::pow(x, np);
    // |f| <= x^{p-1} e^{arg}; refuse arguments the double range cannot hold.
    if (arg > kLogDblMax ||
        (params_.p - 1.0) * std::max(0.0, std::log(x)) + arg > kLogDblMax)
        throw RangeError("f overflows double range at t=" + fmt(t), t);

    double modulation = 1.0;
    if (kind_ == FKind::sine_modulated) {
        double s = std::sin(t);
        modulation = s * s;
    } else if (kind_ == FKind::positive_part_sine) {
        modulation = std::max(std::sin(t), 0.0);
    }
    if (modulation == 0.0) return 0.0;
    return std::pow(x, params_.p - 2.0) * t * modulation * phi_n(params_.N, arg);
}

double Nonlinearity::f(double t) const {
    if (kind_ != FKind::custom_tabulated) return f_canonical_family(t);
    if (tab_t_.empty()) return 0.0;
    if (t <= tab_t_.front()) return tab_f_.front();
    if (t >= tab_t_.back()) return tab_f_.back();
    auto it = std::upper_bound(tab_t_.begin(), tab_t_.end(), t);
    std::size_t i = static_cast<std::size_t>(it - tab_t_.begin()) - 1;
    double h = tab_t_[i + 1] - tab_t_[i];
    double th = (t - tab_t_[i]) / h;
    double t2 = th * th, t3 = t2 * th;
    return (2.0 * t3 - 3.0 * t2 + 1.0) * tab_f_[i] + (t3 - 2.0 * t2 + th) * h * tab_d_[i] +
           (-2.0 * t3 + 3.0 * t2) * tab_f_[i + 1] + (t3 - t2) * h * tab_d_[i + 1];
}

double Nonlinearity::fk_range_integral(double lo, double hi) const {
    auto r = integrate_adaptive([this](double x) { return f(x); }, lo, hi,
                                1e-280, 1e-13, 2000);
    return r.value;
}

double Nonlinearity::G(double t, double tol) const {
    if (!(tol > 0.0)) throw ParamError("primitive tolerance must be > 0");
    if (t == 0.0) return 0.0;
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        auto it = g_cache_.find(t);
        if (it != g_cache_.end() && it->second <= tol) {
            auto vt = g_values_.find(t);
            if (vt != g_values_.end()) return vt->second;
        }
    }
    auto r = integrate_adaptive([this](double x) { return f(x); }, 0.0, t,
                                tol, 1e-13, 4000);
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        g_cache_[t] = r.error;
        g_values_[t] = r.value;
    }
    return r.value;
}

double Nonlinearity::fk_plateau(long k, int sign) const {
    const auto key = std::make_pair(k, sign);
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        auto it = plateau_cache_.find(key);
        if (it != plateau_cache_.end()) return it->second;
    }
    const double kk = double(k), invk = 1.0 / kk;
    // k[G(k+1/k) - G(k)] resp. -k[G(-k-1/k) - G(-k)], both as one short integral.
    double v = (sign > 0) ? kk * fk_range_integral(kk, kk + invk)
                          : kk * fk_range_integral(-kk - invk, -kk);
    std::lock_guard<std::mutex> lock(cache_mutex_);
    plateau_cache_[key] = v;
    return v;
}

double Nonlinearity::fk_inner_slope(long k, int sign) const {
    const auto key = std::make_pair(k, sign);
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        auto it = inner_slope_cache_.find(key);
        if (it != inner_slope_cache_.end()) return it->second;
    }
    const double kk = double(k), invk = 1.0 / kk;
    // k^2 [G(2/k) - G(1/k)] resp. k^2 [G(-2/k) - G(-1/k)].
    double v = (sign > 0) ? kk * kk * fk_range_integral(invk, 2.0 * invk)
                          : -kk * kk * fk_range_integral(-2.0 * invk, -invk);
    std::lock_guard<std::mutex> lock(cache_mutex_);
    inner_slope_cache_[key] = v;
    return v;
}

double Nonlinearity::fk(long k, double s) const {
    if (k < 1) throw ParamError("strauss index k>=1 violated");
    if (s == 0.0) return 0.0;
    const double kk = double(k), invk = 1.0 / kk;
    if (s >= kk) return fk_plateau(k, +1);
    if (s <= -kk) return fk_plateau(k, -1);
    if (s >= invk) return kk * fk_range_integral(s, s + invk);
    if (s <= -invk) return kk * fk_range_integral(s - invk, s);
    return s * fk_inner_slope(k, s > 0.0 ? +1 : -1);
}

EnvelopeValue Nonlinearity::envelope(long k, double s) const {
    if (k < 1) throw ParamError("strauss index k>=1 violated");
    const double x = std::abs(s);
    const double np = params_.conjugate();
    const double two_np = std::pow(2.0, np);
    if (x >= 1.0 / double(k)) {
        const double C1 = params_.a1 * std::pow(2.0, params_.p);
        const double arg = two_np * params_.alpha * std::pow(x, np);
        double bound;
        if (arg > kLogDblMax) {
            bound = std::numeric_limits<double>::infinity();
        } else {
            bound = C1 * std::pow(x, params_.p) * phi_n(params_.N, arg);
        }
        return {bound, EnvelopeBranch::outer};
    }
    const double ex = two_np * params_.alpha;
    const double C2 = params_.a1 * std::pow(2.0, params_.p - 1.0) *
                      (ex > kLogDblMax ? std::numeric_limits<double>::infinity()
                                       : std::exp(ex));
    return {C2 * std::pow(double(k), -(params_.p - 2.0)) * x * x,
            EnvelopeBranch::inner};
}

bool Nonlinearity::envelope_holds(long k, double s, double tol) const {
    const double v = s * fk(k, s);
    const double x = std::abs(s);
    if (v < 0.0 && v < -1e-10 * std::max(1.0, std::abs(v))) return false;
    if (v <= 0.0) return true;
    const double np = params_.conjugate();
    if (x >= 1.0 / double(k)) {
        // log-space comparison: the outer bound may overflow a double.
        const double arg = std::pow(2.0, np) * params_.alpha * std::pow(x, np);
        const double log_bound = std::log(params_.a1) + params_.p * std::log(2.0 * x) +
                                 log_phi_n(params_.N, arg);
        return std::log(v) <= log_bound + tol;
    }
    const EnvelopeValue e = envelope(k, s);
    return v <= e.bound * (1.0 + tol);
}

GrowthReport Nonlinearity::check_growth(const std::vector<double>& grid) const {
    GrowthReport rep;
    const double np = params_.conjugate();
    for (double t : grid) {
        const double x = std::abs(t);
        double lhs, rhs;
        bool log_path = false;
        double log_lhs = 0.0, log_rhs = 0.0;
        try {
            lhs = t * f(t);
            const double arg = params_.alpha * std::pow(x, np);
            rhs = (arg > kLogDblMax)
                      ? std::numeric_limits<double>::infinity()
                      : params_.a1 * std::pow(x, params_.p) * phi_n(params_.N, arg);
        } catch (const RangeError&) {
            // Both sides exceed double range; compare their logarithms.
            if (kind_ == FKind::custom_tabulated) continue;
            const double arg = params_.alpha * std::pow(x, np);
            double modulation = 1.0;
            if (kind_ == FKind::sine_modulated) {
                double sn = std::sin(t);
                modulation = sn * sn;
            } else if (kind_ == FKind::positive_part_sine) {
                modulation = std::max(std::sin(t), 0.0);
            }
            if (modulation == 0.0) continue; // lhs = 0 <= rhs
            log_lhs = params_.p * std::log(x) + std::log(modulation) +
                      log_phi_n(params_.N, arg);
            log_rhs = std::log(params_.a1) + params_.p * std::log(x) +
                      log_phi_n(params_.N, arg);
            log_path = true;
            lhs = log_lhs;
            rhs = log_rhs;
        }
        bool bad;
        if (log_path) {
            bad = log_lhs > log_rhs + 1e-12;
            rep.max_ratio = std::max(rep.max_ratio, std::exp(log_lhs - log_rhs));
        } else {
            bad = (lhs < -1e-300) || (lhs > rhs * (1.0 + 1e-12) + 1e-300);
            if (rhs > 0.0 && std::isfinite(rhs))
                rep.max_ratio = std::max(rep.max_ratio, lhs / rhs);
        }
        if (bad) rep.violations.push_back({t, lhs, rhs});
    }
    return rep;
}

} // namespace nlap
