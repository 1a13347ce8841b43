#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace kslab {

// Certificate scales reach y0 ~ 1e2000, far beyond double.
using Real = long double;
static_assert(std::numeric_limits<Real>::digits >= 64 &&
                  std::numeric_limits<Real>::max_exponent10 >= 4900,
              "kslab needs 80-bit extended long double");

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

struct UnsupportedDimension : DomainError {
    using DomainError::DomainError;
};

struct UnsupportedRegime : DomainError {
    using DomainError::DomainError;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Parameter selection could not satisfy a named constraint.
struct SelectionFailure : std::runtime_error {
    std::string constraint;
    SelectionFailure(std::string which, const std::string& what)
        : std::runtime_error(what), constraint(std::move(which)) {}
};

struct BlowUpTimeExceeded : DomainError {
    using DomainError::DomainError;
};

}  // namespace kslab
