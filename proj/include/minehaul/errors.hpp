#pragma once

#include <stdexcept>
#include <string>

namespace minehaul {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Tensor or layer shape mismatch. The message names the offending layer.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of a function (log-gamma at x <= 0,
/// NIG parameters with alpha <= 1, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Non-finite gradient or loss during optimization.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

class ExpertLost : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, long line = -1)
      : Error(line >= 0 ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace minehaul
