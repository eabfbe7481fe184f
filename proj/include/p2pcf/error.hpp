#pragma once

#include <stdexcept>
#include <string>

namespace p2pcf {

// Base of every error raised by the library. The CLI maps each subclass to
// its own exit status.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed files, unknown peers or variables, invalid parameters.
class InputError : public Error {
 public:
  using Error::Error;
};

// A configured clause-count or time budget was exceeded. The instance is too
// hard for the budget; nothing computed so far is wrong.
class ResourceLimitError : public Error {
 public:
  using Error::Error;
};

// A message broke the consequence-finding protocol (bad history shape,
// unknown split point, ...).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

}  // namespace p2pcf
