#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mbs {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A computation produced a non-finite value or failed to converge.
class NumericError : public Error {
public:
    using Error::Error;
};

/// An environment or algorithm configuration is invalid.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed text input. `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// An experiment spec is invalid (unknown ids, missing keys, empty grids).
class SpecError : public Error {
public:
    using Error::Error;
};

}  // namespace mbs
