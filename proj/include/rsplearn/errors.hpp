#pragma once

#include <stdexcept>
#include <string>

namespace rsplearn {

/// Invalid configuration: malformed files, out-of-range fields, dimension
/// mismatches between components that must agree.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A chain required to be ergodic is (numerically) not: the stationary
/// system is rank-deficient beyond the expected one null direction, the
/// solution is not a probability vector, or the balance residual is too large.
struct NotErgodicError : std::runtime_error {
    explicit NotErgodicError(const std::string& what) : std::runtime_error(what) {}
};

/// An iterative solver exhausted its iteration cap with a residual that is
/// too large to trust the result.
struct ConvergenceError : std::runtime_error {
    explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// A computed matrix failed its defining identities beyond tolerance
/// (for quantities that are validated rather than assumed, e.g. the group
/// inverse axioms).
struct ConditioningError : std::runtime_error {
    explicit ConditioningError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rsplearn
