#pragma once

#include <stdexcept>
#include <string>

namespace pfobs {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Reflection across the boundary is not defined (outside the collar or in a corner zone).
class ReflectionUndefined : public DomainError {
public:
    using DomainError::DomainError;
};

/// Invalid or inconsistent run configuration. Maps to exit code 2 in the CLI.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Adaptive quadrature failed to reach the requested tolerance.
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double achieved)
        : std::runtime_error(what), achieved_(achieved) {}
    double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

/// |u| reached 1 after a time step.
class MaxPrincipleViolation : public std::runtime_error {
public:
    MaxPrincipleViolation(const std::string& what, int i, int j, double value, long step)
        : std::runtime_error(what), i_(i), j_(j), value_(value), step_(step) {}
    int i() const noexcept { return i_; }
    int j() const noexcept { return j_; }
    double value() const noexcept { return value_; }
    long step() const noexcept { return step_; }

private:
    int i_, j_;
    double value_;
    long step_;
};

}  // namespace pfobs
