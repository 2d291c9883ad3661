#pragma once

#include <stdexcept>
#include <string>

namespace edci {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mismatched lengths, periods, or matrix shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A model evaluated outside its valid input range.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data (CSV contents, timestamps).
class DataError : public Error {
 public:
  using Error::Error;
};

// Config file violates its schema. The message carries the field path.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Filesystem failures. The message carries the offending path.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace edci
