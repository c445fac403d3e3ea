#pragma once

#include <stdexcept>
#include <string>

namespace dtsfi {

/// Bad input: parameters outside their admissible set, malformed data files,
/// out-of-range query times. Maps to CLI exit status 1.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Non-finite or otherwise inadmissible values handed to a vector field.
class DomainError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Query time outside a trajectory's covered interval.
class RangeError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Failures of the numerical machinery itself. Maps to CLI exit status 2.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IntegrationError : public NumericalError {
public:
    IntegrationError(const std::string& what, double time)
        : NumericalError(what + " at t=" + std::to_string(time) + " h"), time_(time) {}

    double time() const noexcept { return time_; }

private:
    double time_;
};

/// Too few usable rows to estimate a statistic.
class InsufficientDataError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

} // namespace dtsfi
