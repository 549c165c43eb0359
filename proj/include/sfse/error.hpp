#pragma once

#include <stdexcept>
#include <string>

namespace sfse {

// Base of every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Input outside an operation's domain (beta = 0, L too small, impurity
// away from the boundary, ...).
class DomainError : public Error {
  public:
    using Error::Error;
};

enum class NumericalFailure {
    near_defective,
    degenerate_crossing,
    band_extremum,
    singular_parameter,
    no_convergence,
};

const char* to_string(NumericalFailure failure);

// The input is well formed but the numerics the theory relies on break
// down (defective matrices, degeneracies, vanishing band velocity).
class NumericalError : public Error {
  public:
    NumericalError(NumericalFailure failure, const std::string& what)
        : Error(what), failure_(failure) {}
    NumericalFailure failure() const noexcept { return failure_; }

  private:
    NumericalFailure failure_;
};

// A first-order prediction was requested outside |A + iB| < 1.
class ValidityError : public Error {
  public:
    using Error::Error;
};

// Malformed model document or experiment configuration.
class ConfigError : public Error {
  public:
    using Error::Error;
};

}  // namespace sfse
