#pragma once

#include <stdexcept>
#include <string>

namespace iquant {

// Error taxonomy; these map onto the C API status codes and CLI exit codes.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Bad call-site input (reversed interval, T out of range, ...).
class InvalidArgument : public Error {
public:
  using Error::Error;
};

// Bad user-facing configuration (config files, model specs, records).
class ConfigError : public Error {
public:
  using Error::Error;
};

// Numerical failure (support truncation, degenerate transform, budget).
class NumericError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace iquant
