#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fragrd {

inline constexpr int kMaxDim = 3;

/// Point in R^N for N <= 3; unused trailing coordinates stay zero.
using Point = std::array<double, kMaxDim>;

inline double distance(const Point& a, const Point& b, int dim)
{
    double s = 0.0;
    for (int k = 0; k < dim; ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return std::sqrt(s);
}

inline double squared_distance(const Point& a, const Point& b, int dim)
{
    double s = 0.0;
    for (int k = 0; k < dim; ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return s;
}

/// Lebesgue measure of the unit ball, omega_N.
inline double unit_ball_volume(int dim)
{
    switch (dim) {
    case 1: return 2.0;
    case 2: return std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi / 3.0;
    default: throw std::invalid_argument("unit_ball_volume: dimension must be 1, 2 or 3");
    }
}

/// Radius of the ball of measure `measure` in R^N.
inline double equivalent_radius(double measure, int dim)
{
    return std::pow(measure / unit_ball_volume(dim), 1.0 / dim);
}

// Error taxonomy. The CLI maps each family to an exit code.

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters, malformed documents, violated preconditions.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Geometry-level failures: empty sets, degenerate rasters, incompatible grids.
class GeometryError : public Error {
public:
    using Error::Error;
};

/// The time integrator detected a state it must not continue from.
class SolverAbort : public Error {
public:
    using Error::Error;
};

/// The solution reached the truncation walls before a verdict.
class DomainTooSmall : public SolverAbort {
public:
    using SolverAbort::SolverAbort;
};

/// Threshold search could not produce a certified bracket.
class ThresholdError : public Error {
public:
    using Error::Error;
};

/// A reproduction recipe observed a result contradicting the expected statement.
class AssertionFailure : public Error {
public:
    using Error::Error;
};

inline void check_dim(int dim)
{
    if (dim < 1 || dim > kMaxDim)
        throw ConfigError("dimension must be 1, 2 or 3, got " + std::to_string(dim));
}

} // namespace fragrd
