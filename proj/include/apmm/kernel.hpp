#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "apmm/bitplane.hpp"
#include "apmm/matrix.hpp"

namespace apmm {

/// Blocking parameters for the tiled schedule: b_m x b_n output tiles,
/// K consumed in b_k-bit chunks (b_k a multiple of 32).
class TileConfig {
public:
  TileConfig() = default;

  TileConfig(std::size_t block_rows, std::size_t block_cols, std::size_t block_k_bits);

  std::size_t block_rows() const { return block_rows_; }
  std::size_t block_cols() const { return block_cols_; }
  std::size_t block_k_bits() const { return block_k_bits_; }

  bool operator==(const TileConfig&) const = default;

private:
  std::size_t block_rows_ = 64;
  std::size_t block_cols_ = 64;
  std::size_t block_k_bits_ = 512;
};

/// Exact integer product, 32-bit signed.
using AccumMatrix = IntMatrix;

/// All n_w * n_x single-bit plane products of one multiplication, each an
/// M x N matrix with entries in [-K, K].
class PlaneProductStack {
public:
  PlaneProductStack(BitWidth weight_width, BitWidth feature_width, std::size_t k_logical,
                    std::vector<IntMatrix> products);

  BitWidth weight_width() const { return weight_width_; }
  BitWidth feature_width() const { return feature_width_; }
  std::size_t k_logical() const { return k_logical_; }
  std::size_t rows() const { return products_.front().rows; }
  std::size_t cols() const { return products_.front().cols; }

  /// Product of weight plane i with feature plane j.
  const IntMatrix& product(unsigned weight_plane, unsigned feature_plane) const;

private:
  BitWidth weight_width_;
  BitWidth feature_width_;
  std::size_t k_logical_;
  std::vector<IntMatrix> products_;
};

/// Dot product of two +-1 vectors stored as packed bits:
/// k_logical - 2 * popcount(a XOR b). Both sequences must hold exactly
/// ceil(k_logical/32) words with zeroed padding.
std::int64_t dot_1bit_xor(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b,
                          std::size_t k_logical);

/// One plane-pair product: entry (m, n) is the XOR dot of weight plane
/// `weight_plane` row m against feature plane `feature_plane` row n. The
/// feature operand is packed K-major (logical right-hand element (n, k)
/// lives in row n).
IntMatrix matmul_plane_pair(const PackedBitPlanes& weights, unsigned weight_plane,
                            const PackedBitPlanes& features, unsigned feature_plane);

/// All plane pairs of one multiplication, via matmul_plane_pair.
PlaneProductStack compute_plane_products(const PackedBitPlanes& weights,
                                         const PackedBitPlanes& features);

/// Shift-and-add recovery: Y = sum over (i, j) of 2^(i+j) * Y^(i,j).
AccumMatrix recover(const PlaneProductStack& stack);

/// Largest possible |Y| entry: K * (2^n_w - 1) * (2^n_x - 1).
std::int64_t overflow_bound(BitWidth weight_width, BitWidth feature_width, std::size_t k);

/// Arbitrary-precision matmul over packed bit planes. Bit-exact equal to
/// recover(compute_plane_products(...)) for every TileConfig; computed
/// tile-by-tile with private accumulators so recovery stays local to the
/// tile's working set. Rejects inputs whose overflow_bound exceeds the
/// 32-bit output range before computing anything.
AccumMatrix matmul_ap(const PackedBitPlanes& weights, const PackedBitPlanes& features,
                      const TileConfig& config = {});

}  // namespace apmm
