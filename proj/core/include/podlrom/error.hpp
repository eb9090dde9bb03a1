#pragma once

#include <stdexcept>
#include <string>

namespace podlrom {

// Base class for every failure raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Invalid user input: bad configuration, inconsistent shapes, broken files.
class InvalidArgument : public Error {
public:
  using Error::Error;
};

// Numerical failure during a computation (singular solve, NaN, divergence).
class NumericalError : public Error {
public:
  using Error::Error;
};

// Malformed or incompatible binary file.
class FormatError : public Error {
public:
  using Error::Error;
};

}  // namespace podlrom
