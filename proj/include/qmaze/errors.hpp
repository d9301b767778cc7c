#pragma once

#include <stdexcept>
#include <string>

namespace qmaze {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller supplied an argument outside the operation's domain. The CLI maps
/// this family to exit code 2.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class OutOfRange : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class LengthMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class DimMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class NegativeTime : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class TooShort : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class InvalidAssignment : public Error {
 public:
  using Error::Error;
};

class NoPath : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

class UndefinedTts : public Error {
 public:
  using Error::Error;
};

class SingularFit : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

/// Request arrived in a state that cannot accept it (move after goal,
/// result without a finished maze, ...).
class StateError : public Error {
 public:
  using Error::Error;
};

class Unreachable : public Error {
 public:
  using Error::Error;
};

}  // namespace qmaze
