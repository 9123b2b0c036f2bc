#pragma once

#include <stdexcept>
#include <string>

namespace cdo {

// Base class of every error thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --- period matrix validation ---
struct NotSymmetric : Error {
    using Error::Error;
};
struct ImaginaryPartNotPositiveDefinite : Error {
    using Error::Error;
};

// --- theta evaluation ---
struct RadiusCapExceeded : Error {
    using Error::Error;
};
// z is too close to the zero set of the theta denominator.
struct DivisorProximity : Error {
    using Error::Error;
};

// --- lattice functions / operators ---
// A coefficient or basis function was evaluated at a point of its pole set.
struct PoleHit : Error {
    using Error::Error;
};
struct ArityMismatch : Error {
    using Error::Error;
};
struct EmptyWindow : Error {
    using Error::Error;
};

// --- builders ---
struct NewtonDivergence : Error {
    using Error::Error;
};
struct TooFewIntersections : Error {
    using Error::Error;
};
struct SingularSolve : Error {
    using Error::Error;
};
struct ResidualTooLarge : Error {
    using Error::Error;
};
struct AmbiguousSolution : Error {
    using Error::Error;
};
struct UnexpectedNullspaceDimension : Error {
    using Error::Error;
};

// --- sampling ---
struct SamplingExhausted : Error {
    using Error::Error;
};

// --- configuration ---
struct ConfigError : Error {
    using Error::Error;
};

} // namespace cdo
