#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rkhsfar {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller supplied arguments that violate a precondition.
class InputError : public Error {
public:
    using Error::Error;
};

/// Malformed input file. Row and column are 1-based; 0 means "not applicable".
class ParseError : public InputError {
public:
    ParseError(const std::string& what, std::size_t row, std::size_t column);

    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

/// The simulator refuses a configuration (e.g. a nonstationary transition).
class RefusalError : public InputError {
public:
    using InputError::InputError;
};

/// A computation broke down numerically (non-finite objective, singular system).
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what, long iteration = -1);

    /// Iteration at which the failure was detected, or -1.
    long iteration() const noexcept { return iteration_; }

private:
    long iteration_;
};

/// A metric is undefined for the given inputs (zero normaliser, all-zero spectrum).
class UndefinedMetricError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Filesystem failure; the message carries the path.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace rkhsfar
