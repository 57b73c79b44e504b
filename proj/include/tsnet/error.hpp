#pragma once

#include <stdexcept>
#include <string>

namespace tsnet {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid input to a constructor (time scales, fields, parameters).
class ConstructionError : public Error {
public:
    using Error::Error;
};

/// Index or domain mismatch.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Singular matrices, poles, broken reductions and similar numerical failures.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Malformed pipeline configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// File could not be read or written.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace tsnet
