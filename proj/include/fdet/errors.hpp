#pragma once

#include <stdexcept>
#include <string>

namespace fdet {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid simulation / experiment configuration.
struct ConfigError : Error { using Error::Error; };

// Fault specification violates its own invariants (phase set, overlap, ...).
struct FaultSpecError : Error { using Error::Error; };

// Interval lies outside the signal.
struct RangeError : Error { using Error::Error; };

// File could not be opened / read / written.
struct IoError : Error { using Error::Error; };

// CSV schema problems (missing column, duplicate names).
struct SchemaError : Error { using Error::Error; };

// Malformed cell content; message carries the row index.
struct ParseError : Error { using Error::Error; };

// Not enough usable data (empty window set, no clean run, channel too short).
struct DataError : Error { using Error::Error; };

// Constant channel: standardization impossible.
struct DegenerateSignalError : DataError { using DataError::DataError; };

struct InsufficientLengthError : DataError { using DataError::DataError; };

// Tensor / vector dimensions disagree.
struct ShapeError : Error { using Error::Error; };

// Scalar argument outside its documented domain.
struct ParameterError : Error { using Error::Error; };

// Model file is corrupt, truncated or has an unsupported version.
struct FormatError : Error { using Error::Error; };

// Training produced a non-finite loss.
struct DivergenceError : Error { using Error::Error; };

}  // namespace fdet
