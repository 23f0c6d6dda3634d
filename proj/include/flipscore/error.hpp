#pragma once

#include <stdexcept>
#include <string>

namespace flipscore {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad input: malformed data, unknown names, invalid configuration.
/// The CLI maps these to exit code 1.
class InputError : public Error {
public:
    using Error::Error;
};

/// Numerical or model failure. The CLI maps these to exit code 2.
class NumericalError : public Error {
public:
    using Error::Error;
};

class SingularDesignError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// A mean value sits on the boundary of the family's mean space.
class BoundaryError : public NumericalError {
public:
    BoundaryError(const std::string& what, std::size_t index)
        : NumericalError(what), index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// A tested column lies (numerically) inside the nuisance span.
class DegenerateContrastError : public NumericalError {
public:
    DegenerateContrastError(const std::string& what, std::size_t column)
        : NumericalError(what), column_(column) {}
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t column_;
};

class DegenerateVarianceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NonConvergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class InvalidPlanError : public InputError {
public:
    using InputError::InputError;
};

}  // namespace flipscore
