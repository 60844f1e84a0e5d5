#pragma once

#include <stdexcept>
#include <string>

namespace vtc {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an operation's stated precondition (bad index, bad shape).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Input data (dump, config, attention map) failed validation.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A numeric computation produced a non-finite value or could not be built.
class NumericError : public Error {
 public:
  using Error::Error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw PreconditionError(what);
}

}  // namespace vtc
