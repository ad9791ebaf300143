#pragma once

#include <stdexcept>
#include <string>

namespace stsexo {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument or configuration value was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The mass matrix is too ill-conditioned to invert.
class SingularConfiguration : public Error {
 public:
  using Error::Error;
};

/// An iterative numerical routine failed to converge.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// A simulation left the admissible state region.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, double time_s)
      : Error(what), time_s_(time_s) {}
  double time_s() const { return time_s_; }

 private:
  double time_s_;
};

/// Malformed input file; carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace stsexo
