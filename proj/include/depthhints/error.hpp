#pragma once

#include <stdexcept>
#include <string>

namespace depthhints {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on the data was violated (mismatched dimensions, empty
/// inputs, degenerate calibration, no valid pixels, ...).
class ValueError : public Error {
 public:
  using Error::Error;
};

/// Reading or writing a file failed, or the file content is malformed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace depthhints
