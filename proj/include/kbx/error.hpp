#pragma once

#include <stdexcept>
#include <string>

namespace kbx {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An index (feature, value, class) that does not exist in its space.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unreadable input: CSV files, model files, rule files.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A caller broke an operation's documented precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Internal consistency check failed; indicates a bug.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace kbx
