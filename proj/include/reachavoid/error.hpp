#pragma once

#include <stdexcept>
#include <string>

namespace reachavoid {

// Error taxonomy used across the library. The C API maps each type to a
// status code; inside the C++ core they are thrown as exceptions.

// Mismatched vector/matrix dimensions.
class ShapeError : public std::invalid_argument {
public:
    explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

// Operation called in an invalid order (e.g. backward before forward,
// stepping a finished episode).
class StateError : public std::logic_error {
public:
    explicit StateError(const std::string& what) : std::logic_error(what) {}
};

// Argument outside its documented domain (joint limits, thresholds, ids).
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// Non-finite values where finite ones are required.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// File I/O and format failures.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid configuration contents.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace reachavoid
