#pragma once

#include <stdexcept>
#include <string>

namespace floq {

// Configuration / precondition problems. The CLI maps these to exit code 2.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numeric aborts during a run (unitarity loss, eigenvalue dips, bad
// projections). The CLI maps these to exit code 3.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// A zero-frequency harmonic reached an antiderivative: the drive is resonant
// with itself and the caller must subtract the average first.
struct SecularTermError : ValidationError {
    explicit SecularTermError(const std::string& msg) : ValidationError(msg) {}
};

// Two engineered frequency pairs are closer than the coarse-graining cutoff.
struct PairOverlapError : ValidationError {
    explicit PairOverlapError(const std::string& msg) : ValidationError(msg) {}
};

// A convolution was requested outside the buffered part of a series.
struct InsufficientBufferError : ValidationError {
    explicit InsufficientBufferError(const std::string& msg) : ValidationError(msg) {}
};

}  // namespace floq
