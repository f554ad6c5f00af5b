#ifndef NLAP_BROUWER_HPP
#define NLAP_BROUWER_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <vector>

namespace nlap {

// Continuous field F: R^d -> R^d on the closed ball {|| xi ||_d <= radius} of
// a possibly non-Euclidean norm. If the boundary condition <F(xi), xi> >= 0
// holds on the || ||_d-sphere, F has a zero inside (Brouwer); this module
// samples the condition and searches for the zero.
struct FiniteField {
    int dim = 0;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> eval;
    std::function<double(const Eigen::VectorXd&)> norm; // || ||_d
    double radius = 1.0;

    // Jacobian band structure: J[i][j] = 0 for |i-j| > bandwidth.
    // -1 means dense (unknown). Banded fields get their finite-difference
    // Jacobian by perturbation coloring: 2*bandwidth+1 extra evaluations.
    int bandwidth = -1;
};

struct Certificate {
    double min_value = 0.0;   // min over samples of <F(xi), xi>
    Eigen::VectorXd argmin;
    bool passed = false;      // min_value >= 0
};

// Samples <F(xi), xi> at boundary points: the 2*dim axis spikes first, then
// seeded gaussian directions, all scaled to || xi ||_d = radius. extra points
// (any nonzero vectors) are rescaled to the sphere and checked too. Also
// spot-checks homogeneity and the triangle inequality of the norm; a norm
// violating them is a parameter error, a negative minimum is an outcome.
Certificate certify_boundary(const FiniteField& field, int samples,
                             std::uint64_t seed = 0,
                             const std::vector<Eigen::VectorXd>& extra = {});

struct ZeroResult {
    Eigen::VectorXd z;
    double residual = 0.0;    // |F(z)|_2
    bool converged = false;
    int starts_used = 0;
    long evals = 0;           // field evaluations spent
};

// Damped Newton (finite-difference Jacobian, step max(1e-7, 1e-7|xi_j|))
// from multiple starts inside the ball: caller-supplied warm starts first,
// then the origin, then +-0.5*radius along seeded random directions.
// Stagnating starts fall back to Levenberg-Marquardt descent on |F|_2^2.
// Iterates exceeding the ball are pulled back to the boundary. Never throws
// on failure: converged=false with the best residual is the failure report
// (the zero still exists whenever certify_boundary passed; the search may
// miss it).
ZeroResult find_zero(const FiniteField& field, double tol,
                     std::uint64_t seed = 0, int max_starts = 8,
                     const std::vector<Eigen::VectorXd>& warm = {});

} // namespace nlap

#endif
