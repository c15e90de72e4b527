#pragma once

#include <stdexcept>
#include <string>

namespace apnorm {

// Every exception raised by the library derives from Error; the C API maps
// each subclass onto one apn_status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the operation's domain (negative length, p out of range...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Operation-level precondition not met (lambda too small, epsilon too large...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// A construction (modulus, Cantor levels, phase) could not be carried out.
class ConstructionError : public Error {
 public:
  using Error::Error;
};

// Wrong engine for the phase representation.
class DispatchError : public Error {
 public:
  using Error::Error;
};

// Root finding / quadrature did not reach the requested accuracy.
class NumericError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& msg, int line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace apnorm
