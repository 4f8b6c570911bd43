#pragma once

#include <stdexcept>
#include <string>

namespace qmetro {

// Base class for all toolkit errors. The CLI maps ValidationError to exit
// code 1 and NumericalError to exit code 2.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : Error {
    using Error::Error;
};

struct NumericalError : Error {
    using Error::Error;
};

struct TruncationTooSmall : NumericalError {
    using NumericalError::NumericalError;
};

struct IndexOutOfRange : ValidationError {
    using ValidationError::ValidationError;
};

struct SingularFisher : NumericalError {
    using NumericalError::NumericalError;
};

struct SweepBracketFailure : NumericalError {
    using NumericalError::NumericalError;
};

struct FlatLikelihood : NumericalError {
    using NumericalError::NumericalError;
};

struct DegeneratePosterior : NumericalError {
    using NumericalError::NumericalError;
};

struct OutOfFringeRange : NumericalError {
    using NumericalError::NumericalError;
};

struct ConfigError : ValidationError {
    using ValidationError::ValidationError;
};

}  // namespace qmetro
