#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "apmm/error.hpp"
#include "apmm/matrix.hpp"

namespace apmm {

/// Element bit width. The library targets the ultra-low-bit regime, so
/// widths are capped at 8; everything else is rejected at construction.
class BitWidth {
public:
  explicit BitWidth(int n) : n_(n) {
    if (n < 1 || n > 8) throw OutOfRange("bit width must be in [1, 8]");
  }

  int n() const { return n_; }

  /// Largest representable magnitude, 2^n - 1.
  int max_value() const { return (1 << n_) - 1; }

  /// Number of distinct codes, 2^n.
  unsigned code_count() const { return 1u << n_; }

  bool operator==(const BitWidth&) const = default;

private:
  int n_;
};

/// One n-bit bipolar code. Each bit contributes +2^i when set and -2^i when
/// clear, so the decoded values are exactly the odd integers in
/// [-(2^n - 1), 2^n - 1], symmetric about zero with no zero element.
class BipolarCode {
public:
  BipolarCode(unsigned bits, BitWidth width) : bits_(bits), width_(width) {
    if (bits >= width.code_count()) throw OutOfRange("code has bits above position n-1");
  }

  unsigned bits() const { return bits_; }
  BitWidth width() const { return width_; }

  bool operator==(const BipolarCode&) const = default;

private:
  unsigned bits_;
  BitWidth width_;
};

/// Decoded value: sum over i of (2*bit_i - 1) * 2^i, which collapses to
/// 2*bits - (2^n - 1).
int decode(BipolarCode code);

/// Inverse of decode. `value` must be odd and within range.
BipolarCode encode(int value, BitWidth width);

struct ValueRange {
  int min;
  int max;
  int step;

  bool operator==(const ValueRange&) const = default;
};

/// Representable set for a width: the odd integers from -(2^n - 1) to
/// 2^n - 1 in steps of 2.
ValueRange value_range(BitWidth width);

/// Dense matrix of bipolar codes sharing one width. Row-major, immutable.
class CodeMatrix {
public:
  CodeMatrix(std::size_t rows, std::size_t cols, BitWidth width, std::vector<std::uint8_t> bits);

  /// Encode a matrix of already-odd in-range integers.
  static CodeMatrix from_values(std::size_t rows, std::size_t cols, BitWidth width,
                                std::span<const int> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  BitWidth width() const { return width_; }

  std::uint8_t bits_at(std::size_t r, std::size_t c) const { return bits_[r * cols_ + c]; }
  BipolarCode at(std::size_t r, std::size_t c) const { return {bits_at(r, c), width_}; }
  int value_at(std::size_t r, std::size_t c) const { return decode(at(r, c)); }

  std::span<const std::uint8_t> raw_bits() const { return bits_; }

  bool operator==(const CodeMatrix&) const = default;

private:
  std::size_t rows_;
  std::size_t cols_;
  BitWidth width_;
  std::vector<std::uint8_t> bits_;
};

enum class Granularity : std::uint8_t {
  PerTensor = 0,
  PerRow = 1,
};

/// Code matrix plus the positive scale(s) that map codes back to reals.
class QuantizedTensor {
public:
  QuantizedTensor(CodeMatrix codes, Granularity granularity, std::vector<double> scales);

  const CodeMatrix& codes() const { return codes_; }
  Granularity granularity() const { return granularity_; }
  std::span<const double> scales() const { return scales_; }

  double scale_for_row(std::size_t r) const {
    return granularity_ == Granularity::PerTensor ? scales_[0] : scales_[r];
  }

private:
  CodeMatrix codes_;
  Granularity granularity_;
  std::vector<double> scales_;
};

/// Symmetric absmax quantization onto the bipolar grid.
///
/// Per scaling group (whole tensor or one row): s = max|x| / (2^n - 1), and
/// each element maps to the nearest odd integer of x/s, ties at even
/// integers resolved upward, clamped to the representable range. A group of
/// all zeros uses s = 1 and the +1 code throughout.
QuantizedTensor quantize(const RealMatrix& values, BitWidth width, Granularity granularity);

/// Element (r, c) of the result is scale(r) * decode(codes[r][c]).
RealMatrix dequantize(const QuantizedTensor& q);

}  // namespace apmm
