#pragma once

#include <stdexcept>
#include <string>

namespace rbfq {

// All library failures are reported through this type; `what()` names the
// offending input so callers can surface it unchanged.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a numerical precondition fails (window too small, singular
// local system, budget overrun).  The CLI maps these to exit code 2.
class NumericalError : public Error {
 public:
  using Error::Error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw Error(message);
}

}  // namespace rbfq
