#pragma once

#include <stdexcept>
#include <string>

namespace ganeye {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input/contract failures. The CLI maps these to exit code 1.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

class ContractViolation : public Error {
 public:
  using Error::Error;
};

class CalibrationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class DetectionError : public Error {
 public:
  using Error::Error;
};

class DecodeError : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

class UnsupportedConfiguration : public Error {
 public:
  using Error::Error;
};

// Environment failures. The CLI maps these to exit code 2.
class IoError : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

class SpawnError : public Error {
 public:
  using Error::Error;
};

}  // namespace ganeye
