#pragma once

#include <stdexcept>
#include <string>

namespace sparsebar {

// Base for every error the library raises. The CLI maps the concrete type to
// an exit status.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad configuration or arguments (exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Unreadable or malformed input data (exit code 3).
class DataError : public Error {
public:
    using Error::Error;
};

// Training produced a non-finite value (exit code 4).
class DivergenceError : public Error {
public:
    using Error::Error;
};

}  // namespace sparsebar
