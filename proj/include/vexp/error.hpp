#pragma once

#include <stdexcept>
#include <string>

namespace vexp {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two operands live on grids of different shape.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Non-finite samples, empty sample sets, nonzero boundary values.
class DataError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of an operation (p <= 1, u == 0 in a quotient).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Bad configuration: grid description, unknown keys, missing constants.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Tent or bump support does not fit inside the domain.
class GeometryError : public Error {
public:
    using Error::Error;
};

/// An iteration that is guaranteed to converge in exact arithmetic did not.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// A structural constraint on the problem data is violated; the message names it.
class ValidationError : public Error {
public:
    ValidationError(std::string constraint, const std::string& what)
        : Error(what), constraint_(std::move(constraint)) {}

    const std::string& constraint() const { return constraint_; }

private:
    std::string constraint_;
};

} // namespace vexp
