#pragma once

#include <stdexcept>
#include <string>

namespace tandem {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Stability condition violated, or a solver detected divergence.
class InstabilityError : public Error {
 public:
  using Error::Error;
};

// Requested decay rate lies outside the feasible interval.
class InfeasibleTarget : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class SingularMatrix : public Error {
 public:
  using Error::Error;
};

}  // namespace tandem
