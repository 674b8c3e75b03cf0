#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qeit {

/// Error families, mapped one-to-one onto CLI exit codes.
enum class ErrorCategory { Config = 2, Convergence = 3, Numerical = 4 };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }
    int exit_code() const noexcept { return static_cast<int>(category_); }

private:
    ErrorCategory category_;
};

/// Invalid configuration or an input outside an operation's domain.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorCategory::Config, what) {}
};

class DomainError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

/// Fixed-point iteration did not settle; carries the last two iterates (rad/s).
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double previous, double last)
        : Error(ErrorCategory::Convergence, what), previous_(previous), last_(last) {}

    double previous_iterate() const noexcept { return previous_; }
    double last_iterate() const noexcept { return last_; }

private:
    double previous_;
    double last_;
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorCategory::Numerical, what) {}
};

/// Non-finite state during time integration.
class DivergenceError : public NumericalError {
public:
    DivergenceError(const std::string& what, std::size_t step)
        : NumericalError(what), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

class NoDipError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class InsufficientSpanError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace qeit
