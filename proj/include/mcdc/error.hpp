#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace mcdc {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: malformed files, inconsistent dimensions, out-of-range
/// arguments.  The command-line tool maps these to exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure: covariance not positive definite, vanishing mixture
/// density, singular matrix.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Concatenates the stream representations of all arguments.  Used to build
/// error messages without pulling in a formatting library.
template <typename... Parts>
std::string cat(Parts&&... parts) {
  std::ostringstream os;
  (os << ... << parts);
  return os.str();
}

}  // namespace mcdc
