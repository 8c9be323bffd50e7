// Shared scalar types, tolerances and error categories.

#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace montoda {

using cx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846264338327950288;

class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Vandermonde/DFT recovery of a polynomial failed to reproduce its samples.
class interpolation_error : public error {
public:
    using error::error;
};

// Curve discriminant (or root separation) below the usable threshold.
class degenerate_curve_error : public error {
public:
    using error::error;
};

// Toda exponents left the double-precision guard band.
class exponent_overflow_error : public error {
public:
    using error::error;
};

class convergence_error : public error {
public:
    using error::error;
};

// Mixed absolute/relative comparison used throughout the test suite.
inline bool close(double a, double b, double tol, double scale = 1.0) {
    return std::abs(a - b) <= tol * std::max(1.0, std::max(scale, std::max(std::abs(a), std::abs(b))));
}

inline bool close(cx a, cx b, double tol, double scale = 1.0) {
    return std::abs(a - b) <= tol * std::max(1.0, std::max(scale, std::max(std::abs(a), std::abs(b))));
}

inline double sqr(double x) { return x * x; }

} // namespace montoda
