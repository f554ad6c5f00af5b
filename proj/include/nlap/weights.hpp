#ifndef NLAP_WEIGHTS_HPP
#define NLAP_WEIGHTS_HPP

#include <string>

namespace nlap {

// Radial weight family for the coefficient a(x) = a(|x|).
// All kinds are positive, bounded, nonincreasing in r:
//   power-decay:      amplitude * (1+r)^{-gamma}
//   exponential:      amplitude * e^{-rate*r}
//   constant-on-ball: amplitude on r <= 1, amplitude * e^{-rate*(r-1)} outside
//                     (the constant plateau needs a decaying envelope to stay
//                     integrable on the whole space; the unit ball is fixed).
enum class WeightKind { power_decay, exponential, constant_on_ball };

WeightKind weight_kind_from_string(const std::string& s);
std::string to_string(WeightKind k);

struct Weight {
    WeightKind kind = WeightKind::exponential;
    double gamma_or_rate = 1.0; // gamma for power decay, rate otherwise
    double amplitude = 1.0;
};

double weight_eval(const Weight& w, double r);

// Integrability a in L^{N/(N-q)}(R^N): numeric integral of a^{N/(N-q)} r^{N-1}
// to r = 1e4 plus a closed-form tail bound must be finite. Power decay is
// admissible exactly when gamma > N-q; that window is checked first and named
// in the error. amplitude > 0 and rate > 0 are required for every kind.
void validate_weight(const Weight& w, int N, double q);

// inf over the closed ball B_R. Every kind here is nonincreasing, so the
// infimum is a(R) exactly; the mesh-scan helper below exists to cross-check
// that claim in tests and to serve non-monotone tabulated data if ever added.
double weight_inf_on_ball(const Weight& w, double R);

// Minimum of a over quadrature points of [0, R] on an n_cells uniform grid
// with 4-point Gauss nodes per cell, endpoints included.
double weight_grid_min(const Weight& w, double R, int n_cells);

// ||a||_{L^{N/(N-q)}(R^N)} including the angular factor omega_{N-1}:
// ( omega_{N-1} * int_0^inf a(r)^{N/(N-q)} r^{N-1} dr )^{(N-q)/N},
// numeric to r = 1e4 plus the closed-form tail bound.
double weight_lnq_norm(const Weight& w, int N, double q);

} // namespace nlap

#endif
