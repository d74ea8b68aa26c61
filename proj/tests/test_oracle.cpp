#include <vector>

#include "apmm/bitplane.hpp"
#include "apmm/kernel.hpp"
#include "apmm/oracle.hpp"
#include "apmm/rng.hpp"
#include "doctest.h"

using namespace apmm;

TEST_CASE("naive_matmul on 1x1 operands is plain multiplication") {
  CHECK(naive_matmul(IntMatrix(1, 1, {1}), IntMatrix(1, 1, {1})) == IntMatrix(1, 1, {1}));
  CHECK(naive_matmul(IntMatrix(1, 1, {-7}), IntMatrix(1, 1, {3})) == IntMatrix(1, 1, {-21}));
}

TEST_CASE("naive_matmul reproduces the worked 2-bit dot product") {
  const IntMatrix w(1, 2, {3, 1});
  const IntMatrix x(1, 2, {-1, 3});
  CHECK(naive_matmul(w, x) == IntMatrix(1, 1, {0}));
}

TEST_CASE("a zero operand yields a zero product") {
  Rng rng(1);
  IntMatrix b(3, 4);
  for (auto& v : b.data) v = static_cast<std::int32_t>(rng.range(0, 200)) - 100;
  const IntMatrix out = naive_matmul(IntMatrix(2, 4), b);
  for (std::int32_t v : out.data) CHECK(v == 0);
}

TEST_CASE("naive_matmul validates K and narrows with a check") {
  CHECK_THROWS_AS(naive_matmul(IntMatrix(1, 2), IntMatrix(1, 3)), DimensionMismatch);
  const IntMatrix big(1, 1, {1 << 20});
  const IntMatrix other(1, 1, {1 << 12});
  CHECK_THROWS_AS(naive_matmul(big, other), Overflow);
}

TEST_CASE("decoded turns codes into their integer values") {
  const CodeMatrix codes =
      CodeMatrix::from_values(2, 2, BitWidth(2), std::vector<int>{3, 1, -1, -3});
  CHECK(decoded(codes) == IntMatrix(2, 2, {3, 1, -1, -3}));
}

TEST_CASE("decoded_matmul composes decode with the naive product") {
  const CodeMatrix w = CodeMatrix::from_values(1, 2, BitWidth(2), std::vector<int>{3, 1});
  const CodeMatrix x = CodeMatrix::from_values(1, 2, BitWidth(2), std::vector<int>{-1, 3});
  CHECK(decoded_matmul(w, x) == IntMatrix(1, 1, {0}));
}

TEST_CASE("the unsigned 1-bit construction cancels the all-ones term") {
  // 2*(0 + 1) - (1 + 1) = 0.
  const IntMatrix w_hat(1, 2, {0, 1});
  const IntMatrix x(1, 2, {1, 1});
  CHECK(apnn_unsigned_1bit(w_hat, x) == IntMatrix(1, 1, {0}));
}

TEST_CASE("an all-ones w_hat reduces to the plain product") {
  Rng rng(2);
  IntMatrix x(3, 5);
  for (auto& v : x.data) v = static_cast<std::int32_t>(rng.range(0, 40)) - 20;
  const IntMatrix ones(2, 5, std::vector<std::int32_t>(10, 1));
  CHECK(apnn_unsigned_1bit(ones, x) == naive_matmul(ones, x));
}

TEST_CASE("apnn_unsigned_1bit equals the recentred bipolar product") {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = rng.range(1, 6);
    const std::size_t n = rng.range(1, 6);
    const std::size_t k = rng.range(1, 6);
    IntMatrix w_hat(m, k);
    for (auto& v : w_hat.data) v = static_cast<std::int32_t>(rng.below(2));
    IntMatrix x(n, k);
    for (auto& v : x.data) v = static_cast<std::int32_t>(rng.range(0, 18)) - 9;
    IntMatrix recentred(m, k);
    for (std::size_t e = 0; e < recentred.data.size(); ++e) {
      recentred.data[e] = 2 * w_hat.data[e] - 1;
    }
    CHECK(apnn_unsigned_1bit(w_hat, x) == naive_matmul(recentred, x));
  }
}

TEST_CASE("apnn_unsigned_1bit agrees with the packed kernel on bipolar inputs") {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = rng.range(1, 6);
    const std::size_t n = rng.range(1, 6);
    const std::size_t k = rng.range(1, 6);
    IntMatrix w_hat(m, k);
    for (auto& v : w_hat.data) v = static_cast<std::int32_t>(rng.below(2));
    std::vector<int> w_values(m * k);
    for (std::size_t e = 0; e < w_values.size(); ++e) w_values[e] = 2 * w_hat.data[e] - 1;
    IntMatrix x(n, k);
    std::vector<int> x_values(n * k);
    for (std::size_t e = 0; e < x_values.size(); ++e) {
      x_values[e] = rng.below(2) == 0 ? -1 : 1;
      x.data[e] = x_values[e];
    }
    const AccumMatrix via_kernel =
        matmul_ap(decompose_and_pack(CodeMatrix::from_values(m, k, BitWidth(1), w_values)),
                  decompose_and_pack(CodeMatrix::from_values(n, k, BitWidth(1), x_values)));
    CHECK(via_kernel == apnn_unsigned_1bit(w_hat, x));
  }
}

TEST_CASE("apnn_unsigned_1bit rejects entries outside {0, 1}") {
  const IntMatrix x(1, 2, {1, 1});
  CHECK_THROWS_AS(apnn_unsigned_1bit(IntMatrix(1, 2, {0, 2}), x), OutOfRange);
  CHECK_THROWS_AS(apnn_unsigned_1bit(IntMatrix(1, 2, {-1, 1}), x), OutOfRange);
}

TEST_CASE("scaling one row of A scales only that output row") {
  Rng rng(5);
  IntMatrix a(4, 7);
  IntMatrix b(3, 7);
  for (auto& v : a.data) v = static_cast<std::int32_t>(rng.range(0, 60)) - 30;
  for (auto& v : b.data) v = static_cast<std::int32_t>(rng.range(0, 60)) - 30;
  const IntMatrix base = naive_matmul(a, b);
  for (const std::int32_t c : {-3, 0, 2, 5}) {
    IntMatrix scaled = a;
    for (std::size_t col = 0; col < a.cols; ++col) scaled.at(2, col) *= c;
    const IntMatrix got = naive_matmul(scaled, b);
    for (std::size_t r = 0; r < base.rows; ++r) {
      for (std::size_t n = 0; n < base.cols; ++n) {
        CHECK(got.at(r, n) == (r == 2 ? c * base.at(r, n) : base.at(r, n)));
      }
    }
  }
}
