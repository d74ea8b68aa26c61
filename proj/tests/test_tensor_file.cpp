#include <cstdint>
#include <filesystem>
#include <vector>

#include "apmm/bitplane.hpp"
#include "apmm/rng.hpp"
#include "apmm/tensor_file.hpp"
#include "doctest.h"

using namespace apmm;

namespace {

TensorFile golden_tensor() {
  const RealMatrix values(1, 4, {3.0, -1.0, 1.0, -3.0});
  return TensorFile::from_quantized(quantize(values, BitWidth(2), Granularity::PerTensor));
}

// The quantized 1x4 example serializes to exactly these 32 bytes: header,
// one f64 scale of 1.0, then plane words 0b0011 and 0b0101.
const std::vector<std::uint8_t> kGoldenBytes = {
    'A',  'P',  'M',  'M',  0x01, 0x01, 0x02, 0x00,  // magic, version, kind, n, gran
    0x01, 0x00, 0x00, 0x00, 0x04, 0x00, 0x00, 0x00,  // rows=1, cols=4
    0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0xF0, 0x3F,  // scale = 1.0
    0x03, 0x00, 0x00, 0x00, 0x05, 0x00, 0x00, 0x00,  // plane 0, plane 1
};

}  // namespace

TEST_CASE("the quantized 1x4 example serializes to the golden bytes") {
  CHECK(serialize_tensor(golden_tensor()) == kGoldenBytes);
}

TEST_CASE("parsing the golden bytes reconstructs the tensor") {
  const TensorFile t = parse_tensor(kGoldenBytes);
  CHECK(t.kind == TensorKind::QuantizedBipolar);
  CHECK(t.bit_width == 2);
  CHECK(t.granularity_enum() == Granularity::PerTensor);
  CHECK(t.rows == 1);
  CHECK(t.cols == 4);
  REQUIRE(t.scales.size() == 1);
  CHECK(t.scales[0] == 1.0);
  CHECK(t.packed == std::vector<std::uint32_t>{0b0011u, 0b0101u});
}

TEST_CASE("to_packed rebuilds the same packed planes the quantizer produced") {
  const RealMatrix values(1, 4, {3.0, -1.0, 1.0, -3.0});
  const QuantizedTensor q = quantize(values, BitWidth(2), Granularity::PerTensor);
  const TensorFile t = TensorFile::from_quantized(q);
  CHECK(t.to_packed() == decompose_and_pack(q.codes()));
}

TEST_CASE("float tensors round-trip exactly") {
  const RealMatrix values(2, 3, {0.5, -1.25, 3.0, 1e10, -7.5e-3, 0.0});
  const TensorFile t = TensorFile::from_real(values);
  const TensorFile back = parse_tensor(serialize_tensor(t));
  CHECK(back.kind == TensorKind::Float32);
  CHECK(back.rows == 2);
  CHECK(back.cols == 3);
  CHECK(back.float_data == t.float_data);
  const RealMatrix real = back.to_real();
  for (std::size_t e = 0; e < values.data.size(); ++e) {
    CHECK(real.data[e] == static_cast<float>(values.data[e]));
  }
}

TEST_CASE("per-row quantized tensors round-trip with all scales") {
  Rng rng(19);
  RealMatrix values(5, 37);
  for (auto& v : values.data) v = rng.uniform(-8.0, 8.0);
  const TensorFile t =
      TensorFile::from_quantized(quantize(values, BitWidth(3), Granularity::PerRow));
  const TensorFile back = parse_tensor(serialize_tensor(t));
  CHECK(back.bit_width == t.bit_width);
  CHECK(back.granularity == t.granularity);
  CHECK(back.scales == t.scales);
  CHECK(back.packed == t.packed);
  CHECK(serialize_tensor(back) == serialize_tensor(t));
}

TEST_CASE("write and read through a file reproduce the bytes") {
  const auto path = std::filesystem::temp_directory_path() / "apmm_tensor_roundtrip.apmm";
  const TensorFile t = golden_tensor();
  write_tensor_file(path, t);
  const TensorFile back = read_tensor_file(path);
  CHECK(serialize_tensor(back) == kGoldenBytes);
  std::filesystem::remove(path);
}

TEST_CASE("trailing bytes are rejected") {
  std::vector<std::uint8_t> padded = kGoldenBytes;
  padded.push_back(0x00);
  CHECK_THROWS_AS(parse_tensor(padded), ParseError);
}

TEST_CASE("truncated files are rejected") {
  std::vector<std::uint8_t> cut = kGoldenBytes;
  cut.resize(cut.size() - 1);
  CHECK_THROWS_AS(parse_tensor(cut), ParseError);
  cut.resize(10);
  CHECK_THROWS_AS(parse_tensor(cut), ParseError);
  CHECK_THROWS_AS(parse_tensor(std::vector<std::uint8_t>{}), ParseError);
}

TEST_CASE("bad magic, version, kind, shape, and granularity are rejected") {
  auto mutate = [](std::size_t index, std::uint8_t value) {
    std::vector<std::uint8_t> bytes = kGoldenBytes;
    bytes[index] = value;
    return bytes;
  };
  CHECK_THROWS_AS(parse_tensor(mutate(0, 'X')), ParseError);   // magic
  CHECK_THROWS_AS(parse_tensor(mutate(4, 0x02)), ParseError);  // version
  CHECK_THROWS_AS(parse_tensor(mutate(5, 0x02)), ParseError);  // kind
  CHECK_THROWS_AS(parse_tensor(mutate(6, 0x00)), ParseError);  // width 0
  CHECK_THROWS_AS(parse_tensor(mutate(6, 0x09)), ParseError);  // width 9
  CHECK_THROWS_AS(parse_tensor(mutate(7, 0x03)), ParseError);  // granularity
  CHECK_THROWS_AS(parse_tensor(mutate(8, 0x00)), ParseError);  // rows = 0
}

TEST_CASE("non-positive and non-finite scales are rejected") {
  std::vector<std::uint8_t> zero_scale = kGoldenBytes;
  for (std::size_t i = 16; i < 24; ++i) zero_scale[i] = 0x00;
  CHECK_THROWS_AS(parse_tensor(zero_scale), ParseError);

  std::vector<std::uint8_t> nan_scale = kGoldenBytes;
  for (std::size_t i = 16; i < 24; ++i) nan_scale[i] = 0xFF;
  CHECK_THROWS_AS(parse_tensor(nan_scale), ParseError);
}

TEST_CASE("float tensors must carry width 0 and granularity 0xFF") {
  const TensorFile t = TensorFile::from_real(RealMatrix(1, 1, {2.0}));
  std::vector<std::uint8_t> bytes = serialize_tensor(t);
  bytes[6] = 0x02;
  CHECK_THROWS_AS(parse_tensor(bytes), ParseError);
  bytes[6] = 0x00;
  bytes[7] = 0x00;
  CHECK_THROWS_AS(parse_tensor(bytes), ParseError);
}

TEST_CASE("kind accessors reject the other kind") {
  CHECK_THROWS_AS(golden_tensor().to_real(), ParseError);
  const TensorFile f = TensorFile::from_real(RealMatrix(1, 1, {2.0}));
  CHECK_THROWS_AS(f.to_packed(), ParseError);
  CHECK_THROWS_AS(f.granularity_enum(), ParseError);
}

TEST_CASE("reading a missing file reports an I/O error") {
  CHECK_THROWS_AS(read_tensor_file("/nonexistent/apmm.bin"), IoError);
}
