#pragma once

#include <stdexcept>
#include <string>

namespace bpvei {

// Raised when a model, schedule or law violates its admissibility rules.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised when an argument lies outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

}  // namespace bpvei
