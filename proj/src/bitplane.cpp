#include "apmm/bitplane.hpp"

#include <string>

namespace apmm {

PackedBitPlanes::PackedBitPlanes(std::size_t logical_rows, std::size_t logical_cols,
                                 BitWidth width, std::vector<std::uint32_t> buffer)
    : rows_(logical_rows),
      cols_(logical_cols),
      width_(width),
      words_per_row_((logical_cols + 31) / 32),
      buffer_(std::move(buffer)) {
  if (rows_ == 0 || cols_ == 0) {
    throw DimensionMismatch("PackedBitPlanes dimensions must be positive");
  }
  const std::size_t expected = static_cast<std::size_t>(width_.n()) * rows_ * words_per_row_;
  if (buffer_.size() != expected) {
    throw LengthMismatch("packed buffer holds " + std::to_string(buffer_.size()) +
                         " words, expected " + std::to_string(expected));
  }
  // Padding lanes must be zero in every plane so XOR combining needs no
  // tail correction.
  const unsigned tail_bits = static_cast<unsigned>(cols_ & 31);
  if (tail_bits != 0) {
    const std::uint32_t pad_mask = ~((std::uint32_t{1} << tail_bits) - 1);
    for (std::size_t pr = 0; pr < static_cast<std::size_t>(width_.n()) * rows_; ++pr) {
      if (buffer_[(pr + 1) * words_per_row_ - 1] & pad_mask) {
        throw OutOfRange("packed buffer has nonzero padding bits");
      }
    }
  }
}

std::span<const std::uint32_t> PackedBitPlanes::plane_row(unsigned plane, std::size_t row) const {
  if (plane >= static_cast<unsigned>(width_.n())) {
    throw IndexOutOfBounds("plane " + std::to_string(plane) + " out of range for width " +
                           std::to_string(width_.n()));
  }
  if (row >= rows_) {
    throw IndexOutOfBounds("row " + std::to_string(row) + " out of range for " +
                           std::to_string(rows_) + " rows");
  }
  const std::size_t offset = (static_cast<std::size_t>(plane) * rows_ + row) * words_per_row_;
  return {buffer_.data() + offset, words_per_row_};
}

PackedBitPlanes decompose_and_pack(const CodeMatrix& codes) {
  const std::size_t rows = codes.rows();
  const std::size_t cols = codes.cols();
  const int n = codes.width().n();
  const std::size_t words_per_row = (cols + 31) / 32;

  std::vector<std::uint32_t> buffer(static_cast<std::size_t>(n) * rows * words_per_row, 0);
  for (int plane = 0; plane < n; ++plane) {
    for (std::size_t r = 0; r < rows; ++r) {
      std::uint32_t* row_words =
          buffer.data() + (static_cast<std::size_t>(plane) * rows + r) * words_per_row;
      for (std::size_t k = 0; k < cols; ++k) {
        const std::uint32_t bit = (codes.bits_at(r, k) >> plane) & 1u;
        row_words[k >> 5] |= bit << (k & 31);
      }
    }
  }
  return {rows, cols, codes.width(), std::move(buffer)};
}

CodeMatrix unpack(const PackedBitPlanes& packed) {
  const std::size_t rows = packed.logical_rows();
  const std::size_t cols = packed.logical_cols();
  const int n = packed.width().n();

  std::vector<std::uint8_t> bits(rows * cols, 0);
  for (int plane = 0; plane < n; ++plane) {
    for (std::size_t r = 0; r < rows; ++r) {
      const auto row_words = packed.plane_row(static_cast<unsigned>(plane), r);
      for (std::size_t k = 0; k < cols; ++k) {
        const std::uint8_t bit = (row_words[k >> 5] >> (k & 31)) & 1u;
        bits[r * cols + k] |= static_cast<std::uint8_t>(bit << plane);
      }
    }
  }
  return {rows, cols, packed.width(), std::move(bits)};
}

}  // namespace apmm
