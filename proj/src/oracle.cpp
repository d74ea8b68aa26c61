#include "apmm/oracle.hpp"

#include <limits>
#include <string>

namespace apmm {

IntMatrix naive_matmul(const IntMatrix& a, const IntMatrix& b_k_major) {
  if (a.cols != b_k_major.cols) {
    throw DimensionMismatch("operands disagree on K: " + std::to_string(a.cols) + " vs " +
                            std::to_string(b_k_major.cols));
  }
  IntMatrix out(a.rows, b_k_major.rows);
  for (std::size_t m = 0; m < a.rows; ++m) {
    for (std::size_t n = 0; n < b_k_major.rows; ++n) {
      std::int64_t acc = 0;
      for (std::size_t k = 0; k < a.cols; ++k) {
        acc += static_cast<std::int64_t>(a.at(m, k)) * b_k_major.at(n, k);
      }
      if (acc > std::numeric_limits<std::int32_t>::max() ||
          acc < std::numeric_limits<std::int32_t>::min()) {
        throw Overflow("product entry " + std::to_string(acc) + " exceeds 32-bit range");
      }
      out.at(m, n) = static_cast<std::int32_t>(acc);
    }
  }
  return out;
}

IntMatrix decoded(const CodeMatrix& codes) {
  IntMatrix out(codes.rows(), codes.cols());
  for (std::size_t r = 0; r < codes.rows(); ++r) {
    for (std::size_t c = 0; c < codes.cols(); ++c) {
      out.at(r, c) = codes.value_at(r, c);
    }
  }
  return out;
}

IntMatrix decoded_matmul(const CodeMatrix& weights, const CodeMatrix& features_k_major) {
  return naive_matmul(decoded(weights), decoded(features_k_major));
}

IntMatrix apnn_unsigned_1bit(const IntMatrix& w_hat, const IntMatrix& x_k_major) {
  for (std::int32_t v : w_hat.data) {
    if (v != 0 && v != 1) {
      throw OutOfRange("w_hat entries must be 0 or 1, got " + std::to_string(v));
    }
  }
  // Computed literally as 2 * (W_hat x X) - (J x X) rather than through the
  // recentred form (2 W_hat - J) x X, so tests of that identity mean something.
  IntMatrix ones(w_hat.rows, w_hat.cols, std::vector<std::int32_t>(w_hat.data.size(), 1));
  const IntMatrix lhs = naive_matmul(w_hat, x_k_major);
  const IntMatrix j_term = naive_matmul(ones, x_k_major);
  IntMatrix out(lhs.rows, lhs.cols);
  for (std::size_t e = 0; e < out.data.size(); ++e) {
    out.data[e] = 2 * lhs.data[e] - j_term.data[e];
  }
  return out;
}

}  // namespace apmm
