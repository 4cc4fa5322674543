#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hbary {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input text (CSV / JSON). Carries the 1-based data row when known.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t row = 0)
        : Error(row ? "row " + std::to_string(row) + ": " + what : what), row_(row) {}
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

// Inconsistent options or an empty result after filtering.
class ConfigError : public Error {
public:
    using Error::Error;
};

class UnsupportedTargetError : public Error {
public:
    using Error::Error;
};

class NonConvergenceError : public Error {
public:
    using Error::Error;
};

// Non-finite objective or kernel sums.
class NumericalError : public Error {
public:
    using Error::Error;
};

class CorruptInputError : public Error {
public:
    using Error::Error;
};

}  // namespace hbary
