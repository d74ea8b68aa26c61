#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "apmm/error.hpp"

namespace apmm {

// Row-major signed 32-bit matrix. Shared plumbing for kernel outputs and
// the reference implementations.
struct IntMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::int32_t> data;

  IntMatrix() = default;

  IntMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0) {
    if (r == 0 || c == 0) throw DimensionMismatch("IntMatrix dimensions must be positive");
  }

  IntMatrix(std::size_t r, std::size_t c, std::vector<std::int32_t> values)
      : rows(r), cols(c), data(std::move(values)) {
    if (r == 0 || c == 0) throw DimensionMismatch("IntMatrix dimensions must be positive");
    if (data.size() != r * c) throw LengthMismatch("IntMatrix data length does not match shape");
  }

  std::int32_t& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  std::int32_t at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  bool operator==(const IntMatrix&) const = default;
};

// Row-major real-valued matrix used on the quantizer boundary.
struct RealMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  RealMatrix() = default;

  RealMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {
    if (r == 0 || c == 0) throw DimensionMismatch("RealMatrix dimensions must be positive");
  }

  RealMatrix(std::size_t r, std::size_t c, std::vector<double> values)
      : rows(r), cols(c), data(std::move(values)) {
    if (r == 0 || c == 0) throw DimensionMismatch("RealMatrix dimensions must be positive");
    if (data.size() != r * c) throw LengthMismatch("RealMatrix data length does not match shape");
  }

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  bool operator==(const RealMatrix&) const = default;
};

}  // namespace apmm
