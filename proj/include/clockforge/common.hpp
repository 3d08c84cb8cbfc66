#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace clockforge {

using complexd = std::complex<double>;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Precondition violations (bad N, non-unit axis, malformed parameter vectors, ...).
struct InvalidArgument : Error {
    using Error::Error;
};

// A computation produced inconsistent numbers (normalization loss, imaginary
// residue above the hard threshold, quadrature that fails its moment checks).
struct NumericalError : Error {
    using Error::Error;
};

// Config / schema problems at the CLI boundary.
struct ConfigError : Error {
    using Error::Error;
};

struct Vec3 {
    double x = 0, y = 0, z = 1;

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

inline constexpr Vec3 axis_x{1, 0, 0};
inline constexpr Vec3 axis_y{0, 1, 0};
inline constexpr Vec3 axis_z{0, 0, 1};

// Structural tolerance used for invariant checks; hard-error threshold for
// numerical consistency. See the spin module conventions.
inline constexpr double kStructuralTol = 1e-12;
inline constexpr double kHardTol = 1e-8;

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw InvalidArgument(msg);
}

inline void check_numeric(bool cond, const std::string& msg) {
    if (!cond) throw NumericalError(msg);
}

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace clockforge
