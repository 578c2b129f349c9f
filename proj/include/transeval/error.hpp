#pragma once

#include <stdexcept>
#include <string>

namespace transeval {

/// Base class for every data or validation failure raised by the library.
/// The CLI maps these to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A referenced input (file, role, model) could not be read.
class LoadError : public Error {
 public:
  using Error::Error;
};

/// Line-aligned files disagree in length.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

/// Input content violates a documented constraint (empty line, bad score, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A statistic is undefined for the given input (zero variance, |r| = 1, all draws).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

}  // namespace transeval
