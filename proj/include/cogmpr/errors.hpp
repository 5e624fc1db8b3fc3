#pragma once

#include <stdexcept>
#include <string>

namespace cogmpr {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument is outside its documented domain.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// A closed-form quantity was requested for an unstable queue.
class StabilityError : public Error {
public:
    using Error::Error;
};

/// The model degenerates (e.g. the primary link never succeeds).
class DegenerateModelError : public Error {
public:
    using Error::Error;
};

/// A numeric routine lost accuracy (overflow, residual too large).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Malformed configuration input.
class ParseError : public Error {
public:
    using Error::Error;
};

/// File system failure while reading or writing.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace cogmpr
