#include "apmm/bipolar.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

namespace apmm {

int decode(BipolarCode code) {
  return 2 * static_cast<int>(code.bits()) - code.width().max_value();
}

BipolarCode encode(int value, BitWidth width) {
  if (value % 2 == 0) {
    throw EvenValue("bipolar codes represent odd integers only, got " + std::to_string(value));
  }
  if (std::abs(value) > width.max_value()) {
    throw OutOfRange("value " + std::to_string(value) + " outside [-" +
                     std::to_string(width.max_value()) + ", " + std::to_string(width.max_value()) +
                     "]");
  }
  return {static_cast<unsigned>(value + width.max_value()) / 2u, width};
}

ValueRange value_range(BitWidth width) {
  return {-width.max_value(), width.max_value(), 2};
}

CodeMatrix::CodeMatrix(std::size_t rows, std::size_t cols, BitWidth width,
                       std::vector<std::uint8_t> bits)
    : rows_(rows), cols_(cols), width_(width), bits_(std::move(bits)) {
  if (rows == 0 || cols == 0) throw DimensionMismatch("CodeMatrix dimensions must be positive");
  if (bits_.size() != rows * cols) throw LengthMismatch("CodeMatrix data length does not match shape");
  for (std::uint8_t b : bits_) {
    if (b >= width.code_count()) throw OutOfRange("code has bits above position n-1");
  }
}

CodeMatrix CodeMatrix::from_values(std::size_t rows, std::size_t cols, BitWidth width,
                                   std::span<const int> values) {
  if (values.size() != rows * cols) throw LengthMismatch("value count does not match shape");
  std::vector<std::uint8_t> bits(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    bits[i] = static_cast<std::uint8_t>(encode(values[i], width).bits());
  }
  return {rows, cols, width, std::move(bits)};
}

QuantizedTensor::QuantizedTensor(CodeMatrix codes, Granularity granularity,
                                 std::vector<double> scales)
    : codes_(std::move(codes)), granularity_(granularity), scales_(std::move(scales)) {
  const std::size_t expected = granularity_ == Granularity::PerTensor ? 1 : codes_.rows();
  if (scales_.size() != expected) throw LengthMismatch("scale count does not match granularity");
  for (double s : scales_) {
    if (!std::isfinite(s) || s <= 0.0) throw OutOfRange("scales must be finite and positive");
  }
}

namespace {

// Nearest odd integer of t, ties at even integers resolved upward, clamped
// to the representable range.
int round_to_grid(double t, int max_value) {
  const double q = 2.0 * std::floor(t / 2.0) + 1.0;
  if (q > max_value) return max_value;
  if (q < -max_value) return -max_value;
  return static_cast<int>(q);
}

}  // namespace

QuantizedTensor quantize(const RealMatrix& values, BitWidth width, Granularity granularity) {
  for (double v : values.data) {
    if (!std::isfinite(v)) throw NonFinite("input contains NaN or infinity");
  }

  const std::size_t rows = values.rows;
  const std::size_t cols = values.cols;
  const int max_value = width.max_value();
  const std::size_t groups = granularity == Granularity::PerTensor ? 1 : rows;
  const std::size_t group_len = granularity == Granularity::PerTensor ? rows * cols : cols;

  std::vector<double> scales(groups);
  std::vector<std::uint8_t> bits(rows * cols);
  for (std::size_t g = 0; g < groups; ++g) {
    const double* src = values.data.data() + g * group_len;
    double max_abs = 0.0;
    for (std::size_t i = 0; i < group_len; ++i) {
      max_abs = std::max(max_abs, std::abs(src[i]));
    }
    const double s = max_abs == 0.0 ? 1.0 : max_abs / max_value;
    scales[g] = s;
    for (std::size_t i = 0; i < group_len; ++i) {
      const int q = round_to_grid(src[i] / s, max_value);
      bits[g * group_len + i] = static_cast<std::uint8_t>(encode(q, width).bits());
    }
  }

  return {CodeMatrix(rows, cols, width, std::move(bits)), granularity, std::move(scales)};
}

RealMatrix dequantize(const QuantizedTensor& q) {
  const CodeMatrix& codes = q.codes();
  RealMatrix out(codes.rows(), codes.cols());
  for (std::size_t r = 0; r < codes.rows(); ++r) {
    const double s = q.scale_for_row(r);
    for (std::size_t c = 0; c < codes.cols(); ++c) {
      out.at(r, c) = s * codes.value_at(r, c);
    }
  }
  return out;
}

}  // namespace apmm
