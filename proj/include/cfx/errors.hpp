#pragma once

#include <stdexcept>
#include <string>

namespace cfx {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Block structures of two operands disagree, or a block has the wrong length.
class ShapeError : public Error {
public:
    using Error::Error;
};

class IndexError : public Error {
public:
    using Error::Error;
};

/// A scalar parameter (relaxation, weight, tolerance, ...) is outside its admissible range.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Zero-weight column of a WeightMatrix.
class WeightError : public Error {
public:
    using Error::Error;
};

/// A constraint with zero normal vector (a^i = 0).
class DegenerateConstraintError : public ParameterError {
public:
    using ParameterError::ParameterError;
};

/// A matrix column without any stored nonzero.
class DegenerateColumnError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

class SamplingError : public Error {
public:
    using Error::Error;
};

class GenerationError : public Error {
public:
    using Error::Error;
};

/// Malformed input file or document.
class ParseError : public Error {
public:
    using Error::Error;
};

}  // namespace cfx
