#pragma once

#include <stdexcept>
#include <string>

namespace slab {

/// Raised when an argument lies outside the mathematical domain of an operation
/// (p < 1, empty matrix, shape mismatch, t <= 0, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Raised when an intermediate object outgrows a configured cap.
class SizeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised by the experiment layer when a spec does not validate. Carries the
/// offending key so the CLI can point at it.
class ValidationError : public std::invalid_argument {
public:
    ValidationError(std::string key, const std::string& message)
        : std::invalid_argument(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

}  // namespace slab
