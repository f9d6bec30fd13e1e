#pragma once

#include <stdexcept>
#include <string>

namespace dnr {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed network, point or multiplier file. The message carries a JSON path.
class ParseError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class DisconnectedGraph : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NotRadial : public Error {
 public:
  using Error::Error;
};

/// Spanning-tree enumeration stopped because the count exceeds the cap.
class CapExceeded : public Error {
 public:
  CapExceeded(const std::string& what, long long lower_bound)
      : Error(what), lower_bound_(lower_bound) {}
  /// At least this many spanning trees exist.
  long long lower_bound() const { return lower_bound_; }

 private:
  long long lower_bound_;
};

/// Power-flow oracle or a solve phase failed to converge.
class NoConvergence : public Error {
 public:
  using Error::Error;
};

class NotOptimalInput : public Error {
 public:
  using Error::Error;
};

class LpFailure : public Error {
 public:
  using Error::Error;
};

class CallbackError : public Error {
 public:
  using Error::Error;
};

}  // namespace dnr
