#include <vector>

#include "apmm/bitplane.hpp"
#include "apmm/rng.hpp"
#include "doctest.h"

using namespace apmm;

namespace {

CodeMatrix random_codes(Rng& rng, std::size_t rows, std::size_t cols, BitWidth width) {
  std::vector<std::uint8_t> bits(rows * cols);
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng.below(width.code_count()));
  return {rows, cols, width, std::move(bits)};
}

}  // namespace

TEST_CASE("a single set bit packs into word 0, bit 0") {
  const CodeMatrix codes(1, 1, BitWidth(1), {0b1});
  const PackedBitPlanes packed = decompose_and_pack(codes);
  CHECK(packed.words_per_row() == 1);
  REQUIRE(packed.words().size() == 1);
  CHECK(packed.words()[0] == 0x00000001u);
}

TEST_CASE("K=33 spills into a second word with zero padding") {
  const CodeMatrix codes(1, 33, BitWidth(1), std::vector<std::uint8_t>(33, 0b1));
  const PackedBitPlanes packed = decompose_and_pack(codes);
  CHECK(packed.words_per_row() == 2);
  REQUIRE(packed.words().size() == 2);
  CHECK(packed.words()[0] == 0xFFFFFFFFu);
  CHECK(packed.words()[1] == 0x00000001u);
}

TEST_CASE("2x2 2-bit worked example packs plane-major, LSB plane first") {
  // Values [[3,1],[-1,-3]] carry bit patterns [[11,10],[01,00]].
  const CodeMatrix codes =
      CodeMatrix::from_values(2, 2, BitWidth(2), std::vector<int>{3, 1, -1, -3});
  const PackedBitPlanes packed = decompose_and_pack(codes);
  REQUIRE(packed.words().size() == 4);
  CHECK(packed.words()[0] == 0b01u);  // plane 0, row 0
  CHECK(packed.words()[1] == 0b01u);  // plane 0, row 1
  CHECK(packed.words()[2] == 0b11u);  // plane 1, row 0
  CHECK(packed.words()[3] == 0b00u);  // plane 1, row 1

  const auto row = packed.plane_row(1, 0);
  REQUIRE(row.size() == 1);
  CHECK(row[0] == 0b11u);
}

TEST_CASE("plane_row rejects out-of-range indices") {
  const CodeMatrix codes =
      CodeMatrix::from_values(2, 2, BitWidth(2), std::vector<int>{3, 1, -1, -3});
  const PackedBitPlanes packed = decompose_and_pack(codes);
  CHECK_THROWS_AS(packed.plane_row(2, 0), IndexOutOfBounds);
  CHECK_THROWS_AS(packed.plane_row(0, 2), IndexOutOfBounds);
}

TEST_CASE("single-plane single-row packing is the whole buffer") {
  const CodeMatrix codes(1, 40, BitWidth(1), std::vector<std::uint8_t>(40, 0b1));
  const PackedBitPlanes packed = decompose_and_pack(codes);
  const auto row = packed.plane_row(0, 0);
  REQUIRE(row.size() == packed.words().size());
  for (std::size_t w = 0; w < row.size(); ++w) CHECK(row[w] == packed.words()[w]);
}

TEST_CASE("unpack inverts decompose_and_pack across randomized shapes") {
  Rng rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t rows = rng.range(1, 70);
    const std::size_t cols = rng.range(1, 70);
    const BitWidth width(static_cast<int>(rng.range(1, 8)));
    const CodeMatrix codes = random_codes(rng, rows, cols, width);
    const PackedBitPlanes packed = decompose_and_pack(codes);
    CHECK(unpack(packed) == codes);
  }
}

TEST_CASE("padding bits past the logical column count are zero") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t rows = rng.range(1, 20);
    const std::size_t cols = rng.range(1, 70);
    const BitWidth width(static_cast<int>(rng.range(1, 8)));
    const PackedBitPlanes packed = decompose_and_pack(random_codes(rng, rows, cols, width));
    const std::size_t tail = cols % 32;
    if (tail == 0) continue;
    const std::uint32_t pad_mask = ~((std::uint32_t{1} << tail) - 1);
    for (int p = 0; p < width.n(); ++p) {
      for (std::size_t r = 0; r < rows; ++r) {
        const auto row = packed.plane_row(static_cast<unsigned>(p), r);
        CHECK((row.back() & pad_mask) == 0u);
      }
    }
  }
}

TEST_CASE("plane_row follows the (plane * R + row) * words_per_row offset law") {
  Rng rng(13);
  const CodeMatrix codes = random_codes(rng, 5, 45, BitWidth(3));
  const PackedBitPlanes packed = decompose_and_pack(codes);
  const std::size_t wpr = packed.words_per_row();
  for (unsigned p = 0; p < 3; ++p) {
    for (std::size_t r = 0; r < 5; ++r) {
      const auto row = packed.plane_row(p, r);
      const std::size_t offset = (p * 5 + r) * wpr;
      REQUIRE(row.size() == wpr);
      for (std::size_t w = 0; w < wpr; ++w) CHECK(row[w] == packed.words()[offset + w]);
    }
  }
}

TEST_CASE("plane p of a matrix equals plane 0 of its codes shifted right by p") {
  Rng rng(17);
  const std::size_t rows = 4;
  const std::size_t cols = 50;
  const BitWidth width(5);
  const CodeMatrix codes = random_codes(rng, rows, cols, width);
  const PackedBitPlanes packed = decompose_and_pack(codes);
  for (int p = 0; p < width.n(); ++p) {
    std::vector<std::uint8_t> shifted(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        shifted[r * cols + c] = static_cast<std::uint8_t>(codes.bits_at(r, c) >> p);
      }
    }
    const PackedBitPlanes reference =
        decompose_and_pack(CodeMatrix(rows, cols, width, shifted));
    for (std::size_t r = 0; r < rows; ++r) {
      const auto got = packed.plane_row(static_cast<unsigned>(p), r);
      const auto want = reference.plane_row(0, r);
      for (std::size_t w = 0; w < got.size(); ++w) CHECK(got[w] == want[w]);
    }
  }
}

TEST_CASE("PackedBitPlanes rejects malformed buffers") {
  CHECK_THROWS_AS(PackedBitPlanes(1, 33, BitWidth(1), {0xFFFFFFFFu}), LengthMismatch);
  // Bit 1 is padding when K = 1.
  CHECK_THROWS_AS(PackedBitPlanes(1, 1, BitWidth(1), {0x2u}), OutOfRange);
  CHECK_NOTHROW(PackedBitPlanes(1, 1, BitWidth(1), {0x1u}));
}
