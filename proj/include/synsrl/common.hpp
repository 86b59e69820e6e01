#pragma once

#include <stdexcept>
#include <string>

namespace synsrl {

// Base class for all errors raised by this library. Subclasses carry the
// failure category in the type so callers can catch selectively; the message
// always contains the concrete values that failed.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct MalformedRow : Error {
  MalformedRow(const std::string& msg, long line_no)
      : Error("line " + std::to_string(line_no) + ": " + msg), line(line_no) {}
  long line;
};

struct AlignmentError : Error {
  using Error::Error;
};

struct CyclicTree : Error {
  using Error::Error;
};

struct IndexOutOfRange : Error {
  using Error::Error;
};

struct LengthMismatch : Error {
  using Error::Error;
};

struct ShapeMismatch : Error {
  using Error::Error;
};

struct NotScalarLoss : Error {
  using Error::Error;
};

struct TargetOutOfRange : Error {
  using Error::Error;
};

struct OddWidth : Error {
  using Error::Error;
};

struct NonFiniteLogits : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace synsrl
