#pragma once

#include <stdexcept>
#include <string>

namespace steerbandit {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: wrong lengths, non-finite values, out-of-range parameters.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// All arms share the optimal scalar reward, so gaps and conditioning are undefined.
class DegenerateInstance : public Error {
 public:
  using Error::Error;
};

/// A population standard deviation (or VSPO denominator) is zero.
class DegenerateVariance : public Error {
 public:
  using Error::Error;
};

/// Configuration rejected by schema validation. Maps to CLI exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss or parameter.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace steerbandit
