#pragma once

#include <stdexcept>
#include <string>

namespace simalign {

// Base of every error raised by the library. The CLI maps the two families
// below (input problems vs. I/O problems) onto exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Bad user input: malformed manifests, invariant violations, bad options.
class InputError : public Error {
public:
    using Error::Error;
};

class ParseError : public InputError {
public:
    using InputError::InputError;
};

class ValidationError : public InputError {
public:
    using InputError::InputError;
};

class RaggedRowsError : public InputError {
public:
    using InputError::InputError;
};

class EmptyGroupError : public InputError {
public:
    using InputError::InputError;
};

class ShapeMismatchError : public InputError {
public:
    using InputError::InputError;
};

class TruncationError : public InputError {
public:
    using InputError::InputError;
};

class LengthMismatchError : public InputError {
public:
    using InputError::InputError;
};

class NonPositiveWeightError : public InputError {
public:
    using InputError::InputError;
};

// Numerical failures: degenerate data or a decomposition that did not work.
class NumericalError : public Error {
public:
    using Error::Error;
};

class DegenerateRangeError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class AllZeroVarianceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ZeroVarianceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class InsufficientDataError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class SingularScatterError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class SingularCovarianceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// Rethrows the in-flight exception with `context` prefixed to its message,
// keeping the dynamic type.
[[noreturn]] void rethrow_with_context(const std::string& context);

}  // namespace simalign
