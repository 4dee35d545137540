#pragma once

#include <stdexcept>
#include <string>

namespace oia {

// Raised when tensor extents are incompatible with an operation.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Raised when input data (files, labels, annotations) is malformed.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised when a computation produces a non-finite value that must not be
// silently propagated (e.g. a NaN training loss).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace oia
