#pragma once

#include <stdexcept>
#include <string>

namespace starea {

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SeriesNotConverged : NumericError {
    using NumericError::NumericError;
};

struct TimeTooSmall : DomainError {
    using DomainError::DomainError;
};

struct QuadratureFailure : NumericError {
    using NumericError::NumericError;
};

struct WindowExhausted : NumericError {
    using NumericError::NumericError;
};

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct EmptySample : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ParseError : ConfigError {
    ParseError(const std::string& what, int line, int column)
        : ConfigError(what + " at line " + std::to_string(line) + ", column " + std::to_string(column)),
          line(line), column(column) {}
    int line;
    int column;
};

struct UnknownKey : ConfigError {
    explicit UnknownKey(const std::string& key)
        : ConfigError("unknown key: " + key), key(key) {}
    std::string key;
};

}  // namespace starea
