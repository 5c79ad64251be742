#pragma once

#include <stdexcept>
#include <string>

namespace hfscat {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Scene construction
struct EmptySceneError : Error {
    EmptySceneError() : Error("scene contains no obstacles") {}
};
struct OverlapError : Error {
    using Error::Error;
};

// Surface evaluation
struct OffSurfaceError : Error {
    using Error::Error;
};

// Grid / enumeration budgets
struct ResourceError : Error {
    using Error::Error;
};

// Matrix maps: I + sA numerically singular (focal point on the ray)
struct SingularError : Error {
    using Error::Error;
};
// Matrix maps: grazing reflection, <zeta,eta> ~ 0
struct TangencyError : Error {
    using Error::Error;
};

// Field evaluation at a point of the caustic set
struct CausticError : Error {
    using Error::Error;
};

// Target closer than one wavelength to the boundary
struct NearBoundaryError : Error {
    using Error::Error;
};

// Series truncation did not reach the requested tail bound
struct ConvergenceError : Error {
    using Error::Error;
};

// Bad run configuration (CLI exit code 1)
struct ConfigError : Error {
    using Error::Error;
};

} // namespace hfscat
