#pragma once

#include <stdexcept>
#include <string>

namespace rssi {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dimension or shape mismatch between operands.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Invalid argument value (out of range, non-finite, empty input).
class ValueError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent data: CSV rows, empty selections.
class DataError : public Error {
 public:
  using Error::Error;
};

// Training diverged or a numerical state turned non-finite.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Unreadable, malformed or incompatible checkpoint / config files.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace rssi
