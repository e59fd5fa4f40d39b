#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mesbo {

/// Invalid argument shapes, indices or parameter values.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Numerical failure (non-positive-definite matrix, bracket blow-up, ...).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what, std::ptrdiff_t pivot = -1)
        : std::runtime_error(what), pivot_(pivot) {}

    /// Failing Cholesky pivot, or -1 when not applicable.
    std::ptrdiff_t pivot() const noexcept { return pivot_; }

private:
    std::ptrdiff_t pivot_;
};

/// Requested metric cannot be computed for this objective (e.g. no known maximum).
class UnsupportedMetric : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or invalid configuration. The message names the offending field.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mesbo
