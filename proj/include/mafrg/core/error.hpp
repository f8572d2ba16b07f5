#pragma once

#include <stdexcept>
#include <string>

namespace mafrg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data violates a shape, range or referential invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed file contents (bad magic, truncated payload, unparsable row).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Caller passed arguments outside an operation's domain.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A generator looked past the frames it was allowed to see.
class CausalityViolation : public Error {
 public:
  using Error::Error;
};

/// An external generator process exited abnormally.
class GeneratorCrash : public Error {
 public:
  using Error::Error;
};

/// An external generator process exceeded its time budget.
class GeneratorTimeout : public Error {
 public:
  using Error::Error;
};

}  // namespace mafrg
