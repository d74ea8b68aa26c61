#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "apmm/bipolar.hpp"
#include "apmm/bitplane.hpp"
#include "apmm/matrix.hpp"

namespace apmm {

/// Binary tensor container, little-endian throughout.
///
///   offset  size         field
///   0       4            magic "APMM"
///   4       1            version, 0x01
///   5       1            kind: 0x00 float32 matrix, 0x01 quantized bipolar
///   6       1            bit width n (0 for the float kind)
///   7       1            granularity: 0x00 per-tensor, 0x01 per-row,
///                        0xFF not applicable (float kind)
///   8       4            rows (u32)
///   12      4            cols (u32)
///   16      8 or 8*rows  scales, f64 (quantized kind only)
///   ...     payload      float kind: rows*cols f32, row-major
///                        quantized kind: the PackedBitPlanes buffer
///                        verbatim, n*rows*ceil(cols/32) u32, plane-major
///
/// Payload length must match the header exactly; trailing bytes are an
/// error. Right-operand files for matmul store the matrix K-major (N x K),
/// i.e. pre-transposed into the layout the kernel consumes.
enum class TensorKind : std::uint8_t {
  Float32 = 0x00,
  QuantizedBipolar = 0x01,
};

inline constexpr std::uint8_t kTensorFileVersion = 0x01;
inline constexpr std::uint8_t kGranularityNone = 0xFF;

struct TensorFile {
  TensorKind kind = TensorKind::Float32;
  std::uint8_t bit_width = 0;
  std::uint8_t granularity = kGranularityNone;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<double> scales;        // quantized kind only
  std::vector<float> float_data;     // float kind only
  std::vector<std::uint32_t> packed; // quantized kind only

  static TensorFile from_real(const RealMatrix& m);
  static TensorFile from_quantized(const QuantizedTensor& q);

  RealMatrix to_real() const;
  PackedBitPlanes to_packed() const;
  Granularity granularity_enum() const;
};

/// Exact byte image of a tensor file.
std::vector<std::uint8_t> serialize_tensor(const TensorFile& t);

/// Inverse of serialize_tensor; validates header consistency, payload
/// length, and scale values.
TensorFile parse_tensor(std::span<const std::uint8_t> bytes);

void write_tensor_file(const std::filesystem::path& path, const TensorFile& t);
TensorFile read_tensor_file(const std::filesystem::path& path);

}  // namespace apmm
