#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fdde {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (x <= 0 for
/// gamma, alpha outside (0,1), query point outside the grid, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Expression text could not be parsed. `offset` is the byte offset of the
/// offending token in the source.
class ParseError : public Error {
public:
    enum class Kind { syntax, unknown_identifier, disallowed_variable };

    ParseError(Kind kind, std::size_t offset, const std::string& what)
        : Error(what + " (at offset " + std::to_string(offset) + ")"),
          kind_(kind), offset_(offset) {}

    Kind kind() const noexcept { return kind_; }
    std::size_t offset() const noexcept { return offset_; }

private:
    Kind kind_;
    std::size_t offset_;
};

/// Evaluation produced a non-finite value or hit a singular operation.
class EvalError : public Error {
public:
    using Error::Error;
};

/// Problem file is malformed: missing or unknown key, bad value, out of range.
class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& what)
        : Error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// Two grid functions that must share a grid do not.
class GridMismatch : public Error {
public:
    using Error::Error;
};

/// An iterative procedure hit its cap before meeting its tolerance. Carries
/// the distance history so callers can see how far it got. `step` is the
/// 1-based progressive step that failed, or 0 for a global solve.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, std::vector<double> distances,
                     std::size_t step = 0)
        : Error(what), distances_(std::move(distances)), step_(step) {}

    const std::vector<double>& distances() const noexcept { return distances_; }
    std::size_t step() const noexcept { return step_; }

    double last_distance() const noexcept {
        return distances_.empty() ? 0.0 : distances_.back();
    }

private:
    std::vector<double> distances_;
    std::size_t step_;
};

}  // namespace fdde
