#pragma once

#include <stdexcept>
#include <string>

namespace hsmax {

/// Argument outside the operation's domain (point off the grid, empty family, ...).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Numeric parameter outside its admissible range (p <= 1, exponent <= -1, ...).
struct RangeError : std::range_error {
    using std::range_error::range_error;
};

/// A data invariant failed at run time (non-positive weight, audit mismatch).
struct InvariantViolation : std::logic_error {
    using std::logic_error::logic_error;
};

/// Malformed configuration or command line.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace hsmax
