#ifndef RELALG_ERROR_HPP
#define RELALG_ERROR_HPP

#include <stdexcept>
#include <string>

namespace relalg {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Syntax error with a 1-based line/column position into the offending text.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, int line, int col)
        : Error(msg + " at " + std::to_string(line) + ":" + std::to_string(col)),
          line_(line), col_(col) {}
    int line() const { return line_; }
    int col() const { return col_; }

private:
    int line_;
    int col_;
};

// Numeric evaluation hit a pole (division by zero) or an undefined value.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

// A structural precondition of an operation was violated (degree mismatch,
// coefficient outside the allowed variable domain, ...).
class StructureError : public Error {
public:
    explicit StructureError(const std::string& msg) : Error(msg) {}
};

} // namespace relalg

#endif
