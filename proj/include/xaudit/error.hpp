#pragma once

#include <stdexcept>
#include <string>

namespace xaudit {

// Base class for all library errors. CLI maps SchemaError/ParseError/
// InvalidArgument to exit code 1, everything else to exit code 2.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class SchemaError : public Error {
public:
    explicit SchemaError(const std::string& msg) : Error(msg) {}
};

class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t line)
        : Error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& msg) : Error(msg) {}
};

// Thrown by QueryOracle when the query budget is exhausted; examiner
// checks catch it and report "inconclusive".
class BudgetExhausted : public Error {
public:
    BudgetExhausted() : Error("query budget exhausted") {}
};

}  // namespace xaudit
