#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace errsurf {

/// Failure category; the CLI maps each category to a distinct exit code.
enum class ErrorCategory {
    schema,       // malformed input document, bad dimensions, bad options
    expression,   // formula syntax or evaluation failure
    measurement,  // observation-layer failure (zero mean, f = 0, ...)
    numerical     // numerical routine failure (non-convergence, ...)
};

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& message)
        : std::runtime_error(message), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

/// Formula text could not be parsed; carries the character offset.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t position)
        : Error(ErrorCategory::expression,
                message + " (at position " + std::to_string(position) + ")"),
          position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

class EvalError : public Error {
public:
    explicit EvalError(const std::string& message)
        : Error(ErrorCategory::expression, message) {}
};

class MeasureError : public Error {
public:
    explicit MeasureError(const std::string& message)
        : Error(ErrorCategory::measurement, message) {}
};

class SchemaError : public Error {
public:
    explicit SchemaError(const std::string& message)
        : Error(ErrorCategory::schema, message) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& message)
        : Error(ErrorCategory::numerical, message) {}
};

}  // namespace errsurf
