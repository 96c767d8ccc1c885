#pragma once

#include <stdexcept>
#include <string>

namespace psl {

/// Base class for all errors raised by the engine.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed rule text. Carries 1-based line and column of the offending token.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, int line, int col)
        : Error(msg + " (line " + std::to_string(line) + ", column " + std::to_string(col) + ")"),
          line_(line), col_(col) {}

    int line() const { return line_; }
    int column() const { return col_; }

private:
    int line_;
    int col_;
};

/// Value outside its admissible domain (truth values, weights, similarity scores).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Fact or interpretation data violating the store contract.
class StoreError : public Error {
public:
    using Error::Error;
};

/// Rule cannot be grounded against the given data.
class GroundingError : public Error {
public:
    using Error::Error;
};

/// Optimization failed to reach the requested tolerance.
class SolveError : public Error {
public:
    using Error::Error;
};

} // namespace psl
