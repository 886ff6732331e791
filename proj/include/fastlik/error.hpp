#pragma once

#include <stdexcept>
#include <string>

namespace fastlik {

/// Precondition failure on caller-supplied arguments.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A point lies outside the range an interpolation grid can serve.
class CoverageError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// A user-supplied function produced a non-finite value where one was required.
class EvaluationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace fastlik
