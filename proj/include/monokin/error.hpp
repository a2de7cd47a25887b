#pragma once

#include <stdexcept>
#include <string>

namespace monokin {

// Base for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad inputs: malformed files, invariant violations, out-of-range parameters.
struct ValidationError : Error {
    using Error::Error;
};

// Lookup misses (device intrinsics, named presets, coordinate names).
struct NotFoundError : ValidationError {
    using ValidationError::ValidationError;
};

// Filesystem and serialization failures.
struct IoError : Error {
    using Error::Error;
};

// Non-finite values where finite ones are required.
struct NumericalError : Error {
    using Error::Error;
};

}  // namespace monokin
