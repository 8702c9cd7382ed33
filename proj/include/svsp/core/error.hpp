#pragma once

#include <stdexcept>
#include <string>

namespace svsp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed files, dimension mismatches, violated preconditions.
class InputError : public Error {
 public:
  using Error::Error;
};

// Singular systems, non-finite intermediate values.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Environment bridge framing or transport failures.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

}  // namespace svsp
