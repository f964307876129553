#pragma once

#include <stdexcept>
#include <string>

namespace cmcds {

/// Input data violates a structural invariant (monotonicity, range, grid mismatch).
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A numerical procedure failed (no root in bracket, indefinite matrix, exploding path).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed input file; carries file and line for diagnostics.
class ParseError : public ValidationError {
public:
    ParseError(const std::string& file, std::size_t line, const std::string& msg)
        : ValidationError(file + ":" + std::to_string(line) + ": " + msg),
          file_(file), line_(line) {}

    const std::string& file() const { return file_; }
    std::size_t line() const { return line_; }

private:
    std::string file_;
    std::size_t line_;
};

} // namespace cmcds
