#pragma once

#include <stdexcept>
#include <string>

namespace reprsize {

// Bad argument: outside the domain of the formula.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Evaluation too close to the interpolation threshold (gamma ~ 1) or below BBP where a
// quantity does not exist.
class SingularityError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& what, double achieved = 0.0)
        : std::runtime_error(what), achieved_(achieved) {}
    double achieved_tolerance() const noexcept { return achieved_; }

private:
    double achieved_;
};

}  // namespace reprsize
