#include "apmm/kernel.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <limits>
#include <string>

#if defined(__AVX2__)
#include <immintrin.h>
#endif

namespace apmm {

namespace {

inline std::uint64_t load_u64(const std::uint32_t* p) {
  std::uint64_t v;
  std::memcpy(&v, p, sizeof(v));
  return v;
}

#if defined(__AVX2__)
// Nibble-LUT popcount over 256-bit blocks, accumulated with psadbw. Safe for
// up to 2^16 blocks between flushes; flushing every call keeps it simple.
inline std::int64_t xor_popcount_avx2(const std::uint32_t* a, const std::uint32_t* b,
                                      std::size_t blocks) {
  const __m256i lut =
      _mm256_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4, 0, 1, 1, 2, 1, 2, 2, 3, 1,
                       2, 2, 3, 2, 3, 3, 4);
  const __m256i low_mask = _mm256_set1_epi8(0x0f);
  __m256i acc = _mm256_setzero_si256();
  for (std::size_t i = 0; i < blocks; ++i) {
    const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a) + i);
    const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b) + i);
    const __m256i x = _mm256_xor_si256(va, vb);
    const __m256i lo = _mm256_and_si256(x, low_mask);
    const __m256i hi = _mm256_and_si256(_mm256_srli_epi32(x, 4), low_mask);
    const __m256i counts =
        _mm256_add_epi8(_mm256_shuffle_epi8(lut, lo), _mm256_shuffle_epi8(lut, hi));
    acc = _mm256_add_epi64(acc, _mm256_sad_epu8(counts, _mm256_setzero_si256()));
  }
  const __m128i lo128 = _mm256_castsi256_si128(acc);
  const __m128i hi128 = _mm256_extracti128_si256(acc, 1);
  const __m128i sum = _mm_add_epi64(lo128, hi128);
  return _mm_cvtsi128_si64(sum) + _mm_extract_epi64(sum, 1);
}
#endif

std::int64_t xor_popcount(const std::uint32_t* a, const std::uint32_t* b, std::size_t words) {
  std::int64_t total = 0;
  std::size_t i = 0;
#if defined(__AVX2__)
  const std::size_t blocks = words / 8;
  if (blocks != 0) {
    total = xor_popcount_avx2(a, b, blocks);
    i = blocks * 8;
  }
#endif
  for (; i + 2 <= words; i += 2) {
    total += std::popcount(load_u64(a + i) ^ load_u64(b + i));
  }
  if (i < words) total += std::popcount(a[i] ^ b[i]);
  return total;
}

}  // namespace

TileConfig::TileConfig(std::size_t block_rows, std::size_t block_cols, std::size_t block_k_bits)
    : block_rows_(block_rows), block_cols_(block_cols), block_k_bits_(block_k_bits) {
  if (block_rows == 0 || block_cols == 0) {
    throw OutOfRange("tile dimensions must be positive");
  }
  if (block_k_bits < 32 || block_k_bits % 32 != 0) {
    throw OutOfRange("b_k must be a positive multiple of 32 bits");
  }
}

PlaneProductStack::PlaneProductStack(BitWidth weight_width, BitWidth feature_width,
                                     std::size_t k_logical, std::vector<IntMatrix> products)
    : weight_width_(weight_width),
      feature_width_(feature_width),
      k_logical_(k_logical),
      products_(std::move(products)) {
  const std::size_t expected =
      static_cast<std::size_t>(weight_width_.n()) * static_cast<std::size_t>(feature_width_.n());
  if (products_.size() != expected) {
    throw LengthMismatch("expected " + std::to_string(expected) + " plane products, got " +
                         std::to_string(products_.size()));
  }
  const std::size_t m = products_.front().rows;
  const std::size_t n = products_.front().cols;
  const std::int64_t bound = static_cast<std::int64_t>(k_logical_);
  for (const IntMatrix& p : products_) {
    if (p.rows != m || p.cols != n) {
      throw DimensionMismatch("plane products must share one shape");
    }
    for (std::int32_t v : p.data) {
      if (v > bound || v < -bound) {
        throw OutOfRange("plane product entry " + std::to_string(v) + " outside [-K, K]");
      }
    }
  }
}

const IntMatrix& PlaneProductStack::product(unsigned weight_plane, unsigned feature_plane) const {
  if (weight_plane >= static_cast<unsigned>(weight_width_.n()) ||
      feature_plane >= static_cast<unsigned>(feature_width_.n())) {
    throw IndexOutOfBounds("plane pair (" + std::to_string(weight_plane) + ", " +
                           std::to_string(feature_plane) + ") out of range");
  }
  return products_[weight_plane * static_cast<unsigned>(feature_width_.n()) + feature_plane];
}

std::int64_t dot_1bit_xor(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b,
                          std::size_t k_logical) {
  if (k_logical == 0) throw OutOfRange("k_logical must be positive");
  const std::size_t need = (k_logical + 31) / 32;
  if (a.size() != need || b.size() != need) {
    throw LengthMismatch("word sequences must hold exactly ceil(k/32) words");
  }
  return static_cast<std::int64_t>(k_logical) - 2 * xor_popcount(a.data(), b.data(), need);
}

IntMatrix matmul_plane_pair(const PackedBitPlanes& weights, unsigned weight_plane,
                            const PackedBitPlanes& features, unsigned feature_plane) {
  if (weights.logical_cols() != features.logical_cols()) {
    throw DimensionMismatch("operands disagree on K: " + std::to_string(weights.logical_cols()) +
                            " vs " + std::to_string(features.logical_cols()));
  }
  const std::size_t k = weights.logical_cols();
  if (k > static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max())) {
    throw OverflowBound("K exceeds the 32-bit plane product range");
  }
  IntMatrix out(weights.logical_rows(), features.logical_rows());
  for (std::size_t m = 0; m < out.rows; ++m) {
    const auto w_row = weights.plane_row(weight_plane, m);
    for (std::size_t n = 0; n < out.cols; ++n) {
      out.at(m, n) =
          static_cast<std::int32_t>(dot_1bit_xor(w_row, features.plane_row(feature_plane, n), k));
    }
  }
  return out;
}

PlaneProductStack compute_plane_products(const PackedBitPlanes& weights,
                                         const PackedBitPlanes& features) {
  std::vector<IntMatrix> products;
  products.reserve(static_cast<std::size_t>(weights.width().n()) * features.width().n());
  for (int i = 0; i < weights.width().n(); ++i) {
    for (int j = 0; j < features.width().n(); ++j) {
      products.push_back(matmul_plane_pair(weights, static_cast<unsigned>(i), features,
                                           static_cast<unsigned>(j)));
    }
  }
  return {weights.width(), features.width(), weights.logical_cols(), std::move(products)};
}

AccumMatrix recover(const PlaneProductStack& stack) {
  const std::size_t m = stack.rows();
  const std::size_t n = stack.cols();
  std::vector<std::int64_t> acc(m * n, 0);
  for (int i = 0; i < stack.weight_width().n(); ++i) {
    for (int j = 0; j < stack.feature_width().n(); ++j) {
      const IntMatrix& p = stack.product(static_cast<unsigned>(i), static_cast<unsigned>(j));
      const std::int64_t shift = std::int64_t{1} << (i + j);
      for (std::size_t e = 0; e < acc.size(); ++e) {
        acc[e] += shift * p.data[e];
      }
    }
  }
  AccumMatrix out(m, n);
  for (std::size_t e = 0; e < acc.size(); ++e) {
    if (acc[e] > std::numeric_limits<std::int32_t>::max() ||
        acc[e] < std::numeric_limits<std::int32_t>::min()) {
      throw Overflow("recovered value " + std::to_string(acc[e]) + " exceeds 32-bit range");
    }
    out.data[e] = static_cast<std::int32_t>(acc[e]);
  }
  return out;
}

std::int64_t overflow_bound(BitWidth weight_width, BitWidth feature_width, std::size_t k) {
  return static_cast<std::int64_t>(k) * weight_width.max_value() * feature_width.max_value();
}

AccumMatrix matmul_ap(const PackedBitPlanes& weights, const PackedBitPlanes& features,
                      const TileConfig& config) {
  if (weights.logical_cols() != features.logical_cols()) {
    throw DimensionMismatch("operands disagree on K: " + std::to_string(weights.logical_cols()) +
                            " vs " + std::to_string(features.logical_cols()));
  }
  const std::size_t k = weights.logical_cols();
  const std::int64_t bound = overflow_bound(weights.width(), features.width(), k);
  if (bound > std::numeric_limits<std::int32_t>::max()) {
    throw OverflowBound("output bound " + std::to_string(bound) + " exceeds 32-bit range; " +
                        "K=" + std::to_string(k) + " n_w=" + std::to_string(weights.width().n()) +
                        " n_x=" + std::to_string(features.width().n()));
  }

  const std::size_t rows = weights.logical_rows();
  const std::size_t cols = features.logical_rows();
  const int n_w = weights.width().n();
  const int n_x = features.width().n();
  const std::size_t words_per_row = weights.words_per_row();
  const std::size_t chunk_words = config.block_k_bits() / 32;
  const std::uint32_t* w_base = weights.words().data();
  const std::uint32_t* x_base = features.words().data();
  const std::size_t x_plane_stride = cols * words_per_row;

  AccumMatrix out(rows, cols);
  std::vector<std::int32_t> tile(config.block_rows() * config.block_cols());

  for (std::size_t m0 = 0; m0 < rows; m0 += config.block_rows()) {
    const std::size_t tile_rows = std::min(config.block_rows(), rows - m0);
    for (std::size_t n0 = 0; n0 < cols; n0 += config.block_cols()) {
      const std::size_t tile_cols = std::min(config.block_cols(), cols - n0);
      std::fill(tile.begin(), tile.begin() + tile_rows * tile_cols, 0);

      for (std::size_t w0 = 0; w0 < words_per_row; w0 += chunk_words) {
        const std::size_t cur_words = std::min(chunk_words, words_per_row - w0);
        // Logical bits in this chunk; padding lanes XOR to zero so the
        // formula needs no tail correction.
        const std::int64_t chunk_bits =
            static_cast<std::int64_t>(std::min(k, (w0 + cur_words) * 32) - w0 * 32);

        for (int i = 0; i < n_w; ++i) {
          for (std::size_t mt = 0; mt < tile_rows; ++mt) {
            const std::uint32_t* w_row =
                w_base + (static_cast<std::size_t>(i) * rows + m0 + mt) * words_per_row + w0;
            std::int32_t* acc_row = tile.data() + mt * tile_cols;
            for (std::size_t nt = 0; nt < tile_cols; ++nt) {
              // Feature-side recovery first, then one weight-side shift.
              const std::uint32_t* x_row = x_base + (n0 + nt) * words_per_row + w0;
              std::int64_t partial = 0;
              for (int j = 0; j < n_x; ++j) {
                const std::int64_t dot = chunk_bits - 2 * xor_popcount(w_row, x_row, cur_words);
                partial += dot << j;
                x_row += x_plane_stride;
              }
              acc_row[nt] += static_cast<std::int32_t>(partial << i);
            }
          }
        }
      }

      for (std::size_t mt = 0; mt < tile_rows; ++mt) {
        std::copy_n(tile.data() + mt * tile_cols, tile_cols,
                    out.data.data() + (m0 + mt) * cols + n0);
      }
    }
  }
  return out;
}

}  // namespace apmm
