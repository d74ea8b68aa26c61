#pragma once

#include <stdexcept>
#include <string>

namespace apmm {

// Base class for every error the library throws.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bipolar codes represent odd integers only.
class EvenValue : public Error {
public:
  using Error::Error;
};

// Value outside the representable range of the requested width.
class OutOfRange : public Error {
public:
  using Error::Error;
};

// NaN or infinity where a finite value is required.
class NonFinite : public Error {
public:
  using Error::Error;
};

// Word sequences of inconsistent length.
class LengthMismatch : public Error {
public:
  using Error::Error;
};

// Operand shapes do not agree.
class DimensionMismatch : public Error {
public:
  using Error::Error;
};

class IndexOutOfBounds : public Error {
public:
  using Error::Error;
};

// Accumulated value exceeds the 32-bit output contract.
class Overflow : public Error {
public:
  using Error::Error;
};

// Precondition K*(2^n_w-1)*(2^n_x-1) <= 2^31-1 violated; detected before compute.
class OverflowBound : public Error {
public:
  using Error::Error;
};

// Malformed text or binary input.
class ParseError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace apmm
