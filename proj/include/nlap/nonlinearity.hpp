#ifndef NLAP_NONLINEARITY_HPP
#define NLAP_NONLINEARITY_HPP

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace nlap {

// Parameters of the problem  -Delta_N u + |u|^{N-2}u = lambda a(x)|u|^{q-2}u + f(u)
// with the growth window 1 < q < N < p and rate alpha > 0.
struct ProblemParams {
    int N = 2;
    double p = 4.0;
    double q = 1.5;
    double alpha = 1.0;
    double a1 = 1.0;
    double lambda = 0.0;
    double weight_gamma = 1.0; // decay rate of the weight a(r)

    double conjugate() const { return double(N) / (double(N) - 1.0); } // N' = N/(N-1)
};

// Throws ParamError naming the violated window, e.g. "1<q<N".
void validate_params(const ProblemParams& p);

// phi_n(t) = e^t - sum_{j=0}^{n-2} t^j/j!, the exponential with its leading
// Taylor terms removed. Empty sum for n <= 1, so phi_0 = phi_1 = exp.
// Evaluated by the tail series for t < n to avoid cancellation.
// t < 0 -> DomainError; e^t not representable -> RangeError.
double phi_n(int n, double t);

// log(phi_n(t)), stable for arguments where e^t overflows. t >= 0.
double log_phi_n(int n, double t);

enum class FKind { canonical, sine_modulated, positive_part_sine, custom_tabulated };

FKind fkind_from_string(const std::string& s);
std::string to_string(FKind k);

struct GrowthViolation {
    double t;
    double lhs;   // t*f(t)
    double rhs;   // a1 |t|^p phi_N(alpha |t|^{N'})
};

struct GrowthReport {
    std::vector<GrowthViolation> violations;
    double max_ratio = 0.0; // max over grid of lhs/rhs (0/0 counted as 0)
    bool passed() const { return violations.empty(); }
};

enum class EnvelopeBranch { outer, inner };

struct EnvelopeValue {
    double bound;
    EnvelopeBranch branch;
};

// The right-hand-side nonlinearity f, its primitive G(s) = int_0^s f, and the
// piecewise difference-quotient approximations f_k (Lipschitz, converging to
// f uniformly on bounded sets).
class Nonlinearity {
public:
    Nonlinearity(FKind kind, const ProblemParams& params);

    // custom-tabulated kind: samples (t_i, f_i) interpolated by a monotone
    // cubic (Fritsch-Carlson). Samples must include (0,0), satisfy
    // t_i f_i >= 0, and have strictly increasing t. Constant beyond the ends.
    Nonlinearity(const ProblemParams& params,
                 std::vector<double> sample_t, std::vector<double> sample_f);

    FKind kind() const { return kind_; }
    const ProblemParams& params() const { return params_; }

    // f(t). Sign condition t*f(t) >= 0 holds for every kind.
    double f(double t) const;

    // G(t) = int_0^t f, adaptive quadrature to absolute error <= tol,
    // with a cache of computed (t, G) pairs.
    double G(double t, double tol = 1e-12) const;

    // Six-branch approximation: difference quotients of G at scale 1/k.
    double fk(long k, double s) const;

    // Upper envelope for s*f_k(s): outer branch C1|s|^p phi_N(2^{N'} alpha |s|^{N'})
    // for |s| >= 1/k, inner branch C2 k^{-(p-2)} s^2 for |s| <= 1/k,
    // with C1 = a1 2^p and C2 = a1 2^{p-1} exp(2^{N'} alpha).
    // The bound may be +inf when the outer exponential exceeds double range;
    // use envelope_holds for robust log-space comparison.
    EnvelopeValue envelope(long k, double s) const;

    // Checks s*f_k(s) >= 0 and s*f_k(s) <= envelope in log space (safe where
    // the envelope itself overflows). Relative slack tol for roundoff.
    bool envelope_holds(long k, double s, double tol = 1e-9) const;

    // Verifies 0 <= t f(t) <= a1 |t|^p phi_N(alpha |t|^{N'}) on the grid.
    GrowthReport check_growth(const std::vector<double>& grid) const;

private:
    double f_canonical_family(double t) const;
    double fk_range_integral(double lo, double hi) const; // int_lo^hi f
    double fk_plateau(long k, int sign) const;            // branches |s|>=k
    double fk_inner_slope(long k, int sign) const;        // k^2[G(2s0)-G(s0)]

    FKind kind_;
    ProblemParams params_;

    // custom-tabulated data: nodes, values, Hermite slopes
    std::vector<double> tab_t_, tab_f_, tab_d_;

    mutable std::mutex cache_mutex_;
    mutable std::map<double, double> g_cache_;  // t -> achieved quadrature error
    mutable std::map<double, double> g_values_; // t -> primitive value
    mutable std::map<std::pair<long, int>, double> plateau_cache_;
    mutable std::map<std::pair<long, int>, double> inner_slope_cache_;
};

} // namespace nlap

#endif
