#pragma once

#include <stdexcept>
#include <string>

namespace multicheb {

/// Caller passed something outside an operation's precondition.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionMismatch : public InvalidInput {
 public:
  DimensionMismatch(const std::string& what, int expected, int got)
      : InvalidInput(what + ": expected dimension " + std::to_string(expected) +
                     ", got " + std::to_string(got)) {}
};

/// A numerical routine could not meet its accuracy contract.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace multicheb
