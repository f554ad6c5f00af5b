#ifndef NLAP_ERRORS_HPP
#define NLAP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace nlap {

// Invalid argument outside a documented parameter window. The message names
// the violated invariant (e.g. "1<q<N"). CLI maps this to exit code 2.
class ParamError : public std::invalid_argument {
public:
    explicit ParamError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Negative argument where only t >= 0 is defined.
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& msg) : std::domain_error(msg) {}
};

// Exponential overflow: the value would exceed the representable range.
// Carries the offending argument instead of silently returning infinity.
class RangeError : public std::range_error {
public:
    RangeError(const std::string& msg, double offending)
        : std::range_error(msg), offending_argument(offending) {}
    double offending_argument;
};

// Adaptive quadrature failed to reach the requested tolerance.
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& msg, double achieved)
        : std::runtime_error(msg), achieved_tolerance(achieved) {}
    double achieved_tolerance;
};

// Boundary certificate found a negative inner product: the zero-existence
// hypothesis is violated (lambda too large, or the regularization index too
// small). Distinct from search failure. CLI maps this to exit code 3.
class CertificateFailure : public std::runtime_error {
public:
    CertificateFailure(const std::string& msg, double min_value)
        : std::runtime_error(msg), min_value(min_value) {}
    double min_value;
};

// The zero exists (certificate passed) but the search budget ran out before
// the residual tolerance was met. Carries the best residual seen. Exit code 4.
class BudgetExhausted : public std::runtime_error {
public:
    BudgetExhausted(const std::string& msg, double best_residual)
        : std::runtime_error(msg), best_residual(best_residual) {}
    double best_residual;
};

} // namespace nlap

#endif
