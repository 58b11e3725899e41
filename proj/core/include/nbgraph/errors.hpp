#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nbgraph {

/// Base class for every error raised by the library. The CLI maps the
/// concrete subclasses onto process exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument or configuration (exit code 2).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Malformed input file or data that fails validation (exit code 3).
class DataError : public Error {
public:
    using Error::Error;
};

class FormatError : public DataError {
public:
    using DataError::DataError;
};

class ValidationError : public DataError {
public:
    using DataError::DataError;
};

/// Input outside a function's mathematical domain, e.g. a zero vector
/// under cosine distance.
class DomainError : public DataError {
public:
    using DataError::DataError;
};

class IoError : public DataError {
public:
    using DataError::DataError;
};

/// Numerical failure: non-convergence, rank deficiency (exit code 4).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Raised when a spectral embedding is requested on an affinity whose
/// support is not connected. Carries the component count.
class DisconnectedGraphError : public NumericalError {
public:
    explicit DisconnectedGraphError(std::size_t components)
        : NumericalError("affinity graph is disconnected: " + std::to_string(components) +
                         " components"),
          components_(components) {}

    std::size_t components() const noexcept { return components_; }

private:
    std::size_t components_;
};

/// A statistic that is mathematically undefined on the given input
/// (zero variance, empty edge set). Distinct from NaN results.
class UndefinedStatistic : public Error {
public:
    using Error::Error;
};

} // namespace nbgraph
