#ifndef NLAP_QUADRATURE_HPP
#define NLAP_QUADRATURE_HPP

#include <functional>

namespace nlap {

// 4-point Gauss-Legendre nodes/weights on [-1,1]; exact through degree 7.
inline constexpr double kGauss4X[4] = {
    -0.8611363115940526, -0.3399810435848563,
     0.3399810435848563,  0.8611363115940526};
inline constexpr double kGauss4W[4] = {
     0.3478548451374538,  0.6521451548625461,
     0.6521451548625461,  0.3478548451374538};

struct QuadResult {
    double value;
    double error;   // estimated absolute error
    long evals;
    bool converged;
};

// Adaptive Gauss-Kronrod 7/15 integration of f over [a,b]. A panel is
// accepted when |K15 - G7| <= max(abs_tol_share, rel_tol*|K15|); otherwise it
// is bisected. Throws QuadratureError (carrying the achieved error estimate)
// if the panel budget runs out before the tolerance is met.
QuadResult integrate_adaptive(const std::function<double(double)>& f,
                              double a, double b,
                              double abs_tol, double rel_tol = 1e-12,
                              int max_panels = 4000);

} // namespace nlap

#endif
