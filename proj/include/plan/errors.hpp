#pragma once

#include <stdexcept>
#include <string>

namespace plan {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand extents do not agree with what an operation requires.
class InvalidShape : public Error {
 public:
  using Error::Error;
};

/// NaN/inf input, out-of-range probability or similar bad scalar.
class InvalidValue : public Error {
 public:
  using Error::Error;
};

/// A caller-supplied argument is outside the operation's domain.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace plan
