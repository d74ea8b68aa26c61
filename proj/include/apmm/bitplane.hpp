#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "apmm/bipolar.hpp"

namespace apmm {

/// An n-bit code matrix decomposed into n 1-bit planes and repacked into
/// 32-bit words, all planes concatenated into one contiguous buffer.
///
/// Layout: plane-major (plane 0 = least significant bit first), then
/// row-major, then ascending word index along the column dimension. Within a
/// word, logical column k sits at word k>>5, bit k&31 (LSB-first). Padding
/// bits past the logical column count are always zero, so packed operands
/// can be combined with XOR without a tail correction.
class PackedBitPlanes {
public:
  /// Takes ownership of a prepared buffer; rejects wrong lengths and
  /// nonzero padding bits.
  PackedBitPlanes(std::size_t logical_rows, std::size_t logical_cols, BitWidth width,
                  std::vector<std::uint32_t> buffer);

  std::size_t logical_rows() const { return rows_; }
  std::size_t logical_cols() const { return cols_; }
  BitWidth width() const { return width_; }
  std::size_t words_per_row() const { return words_per_row_; }

  /// Contiguous words of one (plane, row) pair, at buffer offset
  /// (plane * logical_rows + row) * words_per_row.
  std::span<const std::uint32_t> plane_row(unsigned plane, std::size_t row) const;

  std::span<const std::uint32_t> words() const { return buffer_; }

  bool operator==(const PackedBitPlanes&) const = default;

private:
  std::size_t rows_;
  std::size_t cols_;
  BitWidth width_;
  std::size_t words_per_row_;
  std::vector<std::uint32_t> buffer_;
};

/// 1-bit decomposition, 32-bit reassembly, and plane concatenation in one
/// pass. Pure function of the codes.
PackedBitPlanes decompose_and_pack(const CodeMatrix& codes);

/// Exact inverse of decompose_and_pack.
CodeMatrix unpack(const PackedBitPlanes& packed);

}  // namespace apmm
