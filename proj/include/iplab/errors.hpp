#pragma once

#include <stdexcept>
#include <string>

namespace iplab {

/// Malformed geometry, grid or run configuration.
struct ConfigurationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parameters outside the admissible range of a construction.
struct ParameterError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Boundary data that is not positive or not continuous where it must be.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A numerical procedure broke down (quadrature, bisection, time stepping).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace iplab
