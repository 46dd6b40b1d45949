#pragma once

#include <stdexcept>
#include <string>

namespace pipeforge {

// Base for every diagnostic the toolchain raises. Passes throw subclasses
// carrying a machine-checkable kind; the CLI maps them to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Broken internal invariant (scheduler output failing verification, oracle
// divergence). The CLI reports these with exit code 2.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace pipeforge
