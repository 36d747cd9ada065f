#pragma once

#include <stdexcept>
#include <string>

namespace cableimp {

// Malformed or schema-violating input document.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Geometry invariant violated (overlap, bad radii, unresolvable reference).
struct GeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Overflow, singular system, non-convergence.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace cableimp
