#include "apmm/tensor_file.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

namespace apmm {

namespace {

constexpr char kMagic[4] = {'A', 'P', 'M', 'M'};
constexpr std::size_t kHeaderBytes = 16;

void append_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 24));
}

void append_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t read_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint64_t read_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

std::size_t packed_word_count(std::size_t n, std::size_t rows, std::size_t cols) {
  return n * rows * ((cols + 31) / 32);
}

void check_consistent(const TensorFile& t) {
  if (t.rows == 0 || t.cols == 0) throw OutOfRange("tensor dimensions must be positive");
  const std::size_t elems = static_cast<std::size_t>(t.rows) * t.cols;
  if (t.kind == TensorKind::Float32) {
    if (t.bit_width != 0) throw OutOfRange("float tensor must carry bit width 0");
    if (t.granularity != kGranularityNone) {
      throw OutOfRange("float tensor granularity must be 0xFF");
    }
    if (!t.scales.empty()) throw LengthMismatch("float tensor carries no scales");
    if (!t.packed.empty()) throw LengthMismatch("float tensor carries no packed payload");
    if (t.float_data.size() != elems) {
      throw LengthMismatch("float payload holds " + std::to_string(t.float_data.size()) +
                           " values, expected " + std::to_string(elems));
    }
    return;
  }
  if (t.kind != TensorKind::QuantizedBipolar) throw OutOfRange("unknown tensor kind");
  if (t.bit_width < 1 || t.bit_width > 8) throw OutOfRange("quantized bit width must be in [1, 8]");
  std::size_t scale_count;
  if (t.granularity == static_cast<std::uint8_t>(Granularity::PerTensor)) {
    scale_count = 1;
  } else if (t.granularity == static_cast<std::uint8_t>(Granularity::PerRow)) {
    scale_count = t.rows;
  } else {
    throw OutOfRange("quantized granularity must be per-tensor or per-row");
  }
  if (t.scales.size() != scale_count) {
    throw LengthMismatch("expected " + std::to_string(scale_count) + " scales, got " +
                         std::to_string(t.scales.size()));
  }
  for (double s : t.scales) {
    if (!std::isfinite(s) || s <= 0.0) throw OutOfRange("scales must be finite and positive");
  }
  if (!t.float_data.empty()) throw LengthMismatch("quantized tensor carries no float payload");
  const std::size_t words = packed_word_count(t.bit_width, t.rows, t.cols);
  if (t.packed.size() != words) {
    throw LengthMismatch("packed payload holds " + std::to_string(t.packed.size()) +
                         " words, expected " + std::to_string(words));
  }
}

}  // namespace

TensorFile TensorFile::from_real(const RealMatrix& m) {
  constexpr std::size_t limit = std::numeric_limits<std::uint32_t>::max();
  if (m.rows > limit || m.cols > limit) throw OutOfRange("matrix too large for tensor file");
  TensorFile t;
  t.kind = TensorKind::Float32;
  t.rows = static_cast<std::uint32_t>(m.rows);
  t.cols = static_cast<std::uint32_t>(m.cols);
  t.float_data.reserve(m.data.size());
  for (double v : m.data) t.float_data.push_back(static_cast<float>(v));
  return t;
}

TensorFile TensorFile::from_quantized(const QuantizedTensor& q) {
  constexpr std::size_t limit = std::numeric_limits<std::uint32_t>::max();
  const CodeMatrix& codes = q.codes();
  if (codes.rows() > limit || codes.cols() > limit) {
    throw OutOfRange("matrix too large for tensor file");
  }
  TensorFile t;
  t.kind = TensorKind::QuantizedBipolar;
  t.bit_width = static_cast<std::uint8_t>(codes.width().n());
  t.granularity = static_cast<std::uint8_t>(q.granularity());
  t.rows = static_cast<std::uint32_t>(codes.rows());
  t.cols = static_cast<std::uint32_t>(codes.cols());
  t.scales.assign(q.scales().begin(), q.scales().end());
  const PackedBitPlanes packed = decompose_and_pack(codes);
  t.packed.assign(packed.words().begin(), packed.words().end());
  return t;
}

RealMatrix TensorFile::to_real() const {
  if (kind != TensorKind::Float32) throw ParseError("tensor file is not the float32 kind");
  check_consistent(*this);
  RealMatrix m(rows, cols);
  for (std::size_t e = 0; e < m.data.size(); ++e) m.data[e] = float_data[e];
  return m;
}

PackedBitPlanes TensorFile::to_packed() const {
  if (kind != TensorKind::QuantizedBipolar) {
    throw ParseError("tensor file is not the quantized kind");
  }
  check_consistent(*this);
  return {rows, cols, BitWidth(bit_width), packed};
}

Granularity TensorFile::granularity_enum() const {
  if (granularity == static_cast<std::uint8_t>(Granularity::PerTensor)) {
    return Granularity::PerTensor;
  }
  if (granularity == static_cast<std::uint8_t>(Granularity::PerRow)) {
    return Granularity::PerRow;
  }
  throw ParseError("tensor file carries no quantization granularity");
}

std::vector<std::uint8_t> serialize_tensor(const TensorFile& t) {
  check_consistent(t);
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + t.scales.size() * 8 + t.float_data.size() * 4 + t.packed.size() * 4);
  out.insert(out.end(), kMagic, kMagic + 4);
  out.push_back(kTensorFileVersion);
  out.push_back(static_cast<std::uint8_t>(t.kind));
  out.push_back(t.bit_width);
  out.push_back(t.granularity);
  append_u32(out, t.rows);
  append_u32(out, t.cols);
  for (double s : t.scales) append_u64(out, std::bit_cast<std::uint64_t>(s));
  for (float v : t.float_data) append_u32(out, std::bit_cast<std::uint32_t>(v));
  for (std::uint32_t w : t.packed) append_u32(out, w);
  return out;
}

TensorFile parse_tensor(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderBytes) throw ParseError("truncated tensor header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw ParseError("bad magic bytes");
  if (bytes[4] != kTensorFileVersion) {
    throw ParseError("unsupported tensor version " + std::to_string(bytes[4]));
  }
  TensorFile t;
  t.bit_width = bytes[6];
  t.granularity = bytes[7];
  t.rows = read_u32(bytes.data() + 8);
  t.cols = read_u32(bytes.data() + 12);
  if (t.rows == 0 || t.cols == 0) throw ParseError("tensor dimensions must be positive");
  const std::size_t elems = static_cast<std::size_t>(t.rows) * t.cols;
  std::size_t offset = kHeaderBytes;

  if (bytes[5] == static_cast<std::uint8_t>(TensorKind::Float32)) {
    t.kind = TensorKind::Float32;
    if (t.bit_width != 0) throw ParseError("float tensor must carry bit width 0");
    if (t.granularity != kGranularityNone) {
      throw ParseError("float tensor granularity must be 0xFF");
    }
    if (bytes.size() != offset + elems * 4) {
      throw ParseError("float payload length mismatch: file holds " +
                       std::to_string(bytes.size() - offset) + " bytes, expected " +
                       std::to_string(elems * 4));
    }
    t.float_data.reserve(elems);
    for (std::size_t e = 0; e < elems; ++e) {
      t.float_data.push_back(std::bit_cast<float>(read_u32(bytes.data() + offset + e * 4)));
    }
    return t;
  }

  if (bytes[5] != static_cast<std::uint8_t>(TensorKind::QuantizedBipolar)) {
    throw ParseError("unknown tensor kind " + std::to_string(bytes[5]));
  }
  t.kind = TensorKind::QuantizedBipolar;
  if (t.bit_width < 1 || t.bit_width > 8) {
    throw ParseError("quantized bit width must be in [1, 8]");
  }
  std::size_t scale_count;
  if (t.granularity == static_cast<std::uint8_t>(Granularity::PerTensor)) {
    scale_count = 1;
  } else if (t.granularity == static_cast<std::uint8_t>(Granularity::PerRow)) {
    scale_count = t.rows;
  } else {
    throw ParseError("quantized granularity must be 0x00 or 0x01");
  }
  if (bytes.size() < offset + scale_count * 8) throw ParseError("truncated scale block");
  t.scales.reserve(scale_count);
  for (std::size_t s = 0; s < scale_count; ++s) {
    const double scale = std::bit_cast<double>(read_u64(bytes.data() + offset + s * 8));
    if (!std::isfinite(scale) || scale <= 0.0) {
      throw ParseError("scales must be finite and positive");
    }
    t.scales.push_back(scale);
  }
  offset += scale_count * 8;

  const std::size_t words = packed_word_count(t.bit_width, t.rows, t.cols);
  if (bytes.size() != offset + words * 4) {
    throw ParseError("packed payload length mismatch: file holds " +
                     std::to_string(bytes.size() - offset) + " bytes, expected " +
                     std::to_string(words * 4));
  }
  t.packed.reserve(words);
  for (std::size_t w = 0; w < words; ++w) {
    t.packed.push_back(read_u32(bytes.data() + offset + w * 4));
  }
  return t;
}

void write_tensor_file(const std::filesystem::path& path, const TensorFile& t) {
  const std::vector<std::uint8_t> bytes = serialize_tensor(t);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

TensorFile read_tensor_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure on " + path.string());
  return parse_tensor(bytes);
}

}  // namespace apmm
