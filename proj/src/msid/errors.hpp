#pragma once

#include <stdexcept>
#include <string>

namespace msid {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters or configuration (bad band, zero period length, ...).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// File system or file format failures (missing file, malformed CSV/JSON).
class IoError : public Error {
public:
    using Error::Error;
};

/// Data content that fails validation (NaN samples, short records, grid mismatch).
class DataError : public Error {
public:
    using Error::Error;
};

/// Numerical failures (rank-deficient regression, unstable filter, no steady state).
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace msid
