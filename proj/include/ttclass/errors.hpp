#pragma once

#include <stdexcept>
#include <string>

namespace ttclass {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid input: bad shapes, bad configuration, violated preconditions,
/// exceeded size caps. Maps to CLI exit code 2.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A numerical procedure failed (factorization did not converge, ...).
/// Maps to CLI exit code 3.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// File system or file format problems. Maps to CLI exit code 4.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace ttclass
