#pragma once

#include <stdexcept>
#include <string>

namespace optwvp {

// Base class so callers can catch everything from this library at once.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Bad argument values: sizes, ranges, mismatched vector lengths.
class ParameterError : public Error {
public:
  using Error::Error;
};

// Input text that does not match the expected layout.  line() is 1-based and
// 0 when the failure is not tied to a single line.
class ParseError : public Error {
public:
  ParseError(int line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  explicit ParseError(const std::string& what) : Error(what), line_(0) {}
  int line() const { return line_; }

private:
  int line_ = 0;
};

// Filesystem trouble: missing file, unwritable path.
class IoError : public Error {
public:
  using Error::Error;
};

// Problem too large for the requested operation (enumeration cut-offs).
class CapacityError : public Error {
public:
  using Error::Error;
};

// A caller handed us state that violates a documented precondition, e.g. a
// route that is infeasible even with all service times at zero.
class PreconditionError : public Error {
public:
  using Error::Error;
};

// Inconsistent run setup: unknown method names, missing references.
class ConfigError : public Error {
public:
  using Error::Error;
};

// Training collapsed and stayed collapsed; carries a diagnostic summary.
class DivergenceError : public Error {
public:
  using Error::Error;
};

}  // namespace optwvp
