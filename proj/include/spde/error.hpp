#pragma once

#include <stdexcept>
#include <string>

namespace spde {

// Base of every error raised by the toolkit. The CLI maps the subclasses
// to exit codes: validation-type errors exit 2, NumericalError exits 3.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "error"; }
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
  public:
    using Error::Error;
    const char* kind() const noexcept override { return "domain"; }
};

// Request for a combination the toolkit deliberately does not support.
class CapabilityError : public Error {
  public:
    using Error::Error;
    const char* kind() const noexcept override { return "capability"; }
};

// Malformed or insufficient input data (empty samples, too few lags, ...).
class InputError : public Error {
  public:
    using Error::Error;
    const char* kind() const noexcept override { return "input"; }
};

// Mismatched sizes between arrays that must line up.
class ShapeError : public Error {
  public:
    using Error::Error;
    const char* kind() const noexcept override { return "shape"; }
};

// Factorization failure, overflow or other floating-point breakdown.
class NumericalError : public Error {
  public:
    using Error::Error;
    const char* kind() const noexcept override { return "numerical"; }
};

} // namespace spde
