#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cvent {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition of an operation was violated by the caller.
class ContractViolation : public Error {
public:
    using Error::Error;
};

/// A density operator failed one of the validity checks. `magnitude` is the
/// measured violation (mismatch, eigenvalue or trace, depending on `kind`).
class ValidationError : public Error {
public:
    enum class Kind { shape, non_finite, hermiticity, positivity, trace };

    ValidationError(Kind kind, double magnitude, const std::string& what)
        : Error(what), kind_(kind), magnitude_(magnitude) {}

    Kind kind() const noexcept { return kind_; }
    double magnitude() const noexcept { return magnitude_; }

private:
    Kind kind_;
    double magnitude_;
};

/// Malformed QSTATE input. `line` is 1-based; 0 when the error is not tied
/// to a particular line (e.g. unreadable file).
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& msg)
        : Error(line ? "line " + std::to_string(line) + ": " + msg : msg), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace cvent
