#pragma once

#include <stdexcept>
#include <string>

namespace autocut {

/// Base class for every failure raised by the library. The CLI maps these to
/// exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or invariant-violating file contents.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace autocut
