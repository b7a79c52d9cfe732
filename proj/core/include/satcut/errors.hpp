#pragma once

#include <stdexcept>
#include <string>

namespace satcut {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed case file. Carries the 1-based line number when known.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, int line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg),
          line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_ = 0;
};

/// Structural problem: duplicate bus, dangling branch endpoint, unknown id.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Injection balancing failed (strict violation, missing slack bus, ...).
class BalanceError : public Error {
public:
    using Error::Error;
};

/// No valid network flow exists, or a routing script cannot be applied.
class FlowError : public Error {
public:
    using Error::Error;
};

/// DC solve failed: missing susceptance, singular system, islanding outage.
class SolveError : public Error {
public:
    using Error::Error;
};

}  // namespace satcut
