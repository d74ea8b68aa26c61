// apmm: arbitrary-precision integer matmul over packed bit planes.
//
// Subcommands:
//   verify    randomized kernel-vs-oracle property suite
//   bench     timing harness, CSV output
//   quantize  float tensor/CSV -> quantized bipolar tensor file
//   matmul    quantized tensor file pair -> integer or dequantized result
//
// Exit status: 0 success, 1 verification/validation failure, 2 usage or
// I/O error.

#include <cctype>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "apmm/bipolar.hpp"
#include "apmm/bitplane.hpp"
#include "apmm/kernel.hpp"
#include "apmm/oracle.hpp"
#include "apmm/rng.hpp"
#include "apmm/tensor_file.hpp"
#include "apmm/verify.hpp"

using namespace apmm;

namespace {

// Keeps timed results observable so the loop bodies cannot be elided.
volatile std::uint32_t g_sink = 0;

// ---------------------------------------------------------------- verify

int run_verify_command(const VerifyOptions& options) {
  const VerifyReport report = run_verify(options);
  for (const PropertyResult& p : report.properties) {
    if (p.passed) {
      std::cout << "PASS " << p.name << " (" << p.cases << " cases)\n";
    } else {
      std::cout << "FAIL " << p.name << "\n  " << p.detail << "\n";
    }
  }
  if (report.all_passed()) {
    std::cout << "all " << report.properties.size() << " properties passed (seed "
              << options.seed << ")\n";
    return 0;
  }
  std::cout << "verification FAILED\n";
  return 1;
}

// ----------------------------------------------------------------- bench

struct BenchShape {
  std::size_t m, n, k;
};

std::vector<BenchShape> preset_shapes(const std::string& name) {
  if (name == "square") {
    return {{1024, 1024, 1024}, {2048, 2048, 2048}, {4096, 4096, 4096}};
  }
  // llama2-7b GEMM shapes; the 10.5k dimension is 10.5 * 1024 = 10752.
  return {{1024, 4096, 4096}, {1024, 10752, 4096}, {1024, 4096, 10752}};
}

std::vector<std::size_t> parse_size_list(const std::string& text, std::size_t count,
                                         const std::string& what) {
  std::vector<std::size_t> out;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(item, &pos);
      while (pos < item.size() && std::isspace(static_cast<unsigned char>(item[pos]))) ++pos;
      if (pos != item.size() || v <= 0) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw ParseError("cannot parse '" + text + "' as " + what);
    }
  }
  if (out.size() != count) throw ParseError("expected " + std::to_string(count) + " values in '" +
                                            text + "' for " + what);
  return out;
}

CodeMatrix random_codes(Rng& rng, std::size_t rows, std::size_t cols, BitWidth width) {
  std::vector<std::uint8_t> bits(rows * cols);
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng.below(width.code_count()));
  return {rows, cols, width, std::move(bits)};
}

template <typename Body>
double mean_ns(Body&& body, int warmup, int iters) {
  for (int i = 0; i < warmup; ++i) body();
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < iters; ++i) body();
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::nano>(stop - start).count() / iters;
}

std::string csv_row(const BenchShape& s, int n_w, int n_x, const char* kernel, int iters,
                    double ns_per_call) {
  const double seconds = ns_per_call * 1e-9;
  const double tops = 2.0 * static_cast<double>(s.m) * static_cast<double>(s.n) *
                      static_cast<double>(s.k) / seconds / 1e12;
  char line[160];
  std::snprintf(line, sizeof(line), "%zu,%zu,%zu,%d,%d,%s,%d,%.1f,%.6f", s.m, s.n, s.k, n_w, n_x,
                kernel, iters, ns_per_call, tops);
  return line;
}

struct BenchArgs {
  std::string preset;
  std::string shape;
  std::string bits = "1,1";
  int iters = 10;
  int warmup = 2;
  std::uint64_t seed = 1;
  std::string csv_path;
  bool include_pack = false;
  bool with_oracle = false;
};

int run_bench_command(const BenchArgs& args) {
  if (args.preset.empty() == args.shape.empty()) {
    std::cerr << "error: exactly one of --preset and --shape is required\n";
    return 2;
  }
  const std::vector<BenchShape> shapes = [&] {
    if (!args.preset.empty()) return preset_shapes(args.preset);
    const auto v = parse_size_list(args.shape, 3, "a shape M,N,K");
    return std::vector<BenchShape>{{v[0], v[1], v[2]}};
  }();
  const auto bit_pair = parse_size_list(args.bits, 2, "a bit-width pair n_w,n_x");
  if (bit_pair[0] > 8 || bit_pair[1] > 8) throw ParseError("bit widths must be in [1, 8]");
  const BitWidth n_w(static_cast<int>(bit_pair[0]));
  const BitWidth n_x(static_cast<int>(bit_pair[1]));

  std::vector<std::string> rows;
  Rng rng(args.seed);
  for (const BenchShape& shape : shapes) {
    const std::int64_t bound = overflow_bound(n_w, n_x, shape.k);
    if (bound > std::numeric_limits<std::int32_t>::max()) {
      std::cerr << "skipped " << shape.m << "x" << shape.n << "x" << shape.k << " at n_w="
                << n_w.n() << " n_x=" << n_x.n() << ": overflow bound " << bound
                << " exceeds the 32-bit output range\n";
      continue;
    }
    std::cerr << "bench " << shape.m << "x" << shape.n << "x" << shape.k << " n_w=" << n_w.n()
              << " n_x=" << n_x.n() << " ..." << std::endl;
    const CodeMatrix w = random_codes(rng, shape.m, shape.k, n_w);
    const CodeMatrix x = random_codes(rng, shape.n, shape.k, n_x);
    const PackedBitPlanes wp = decompose_and_pack(w);
    const PackedBitPlanes xp = decompose_and_pack(x);

    const double ap_ns = mean_ns(
        [&] {
          const AccumMatrix y = matmul_ap(wp, xp);
          g_sink = g_sink ^ static_cast<std::uint32_t>(y.data.front() + y.data.back());
        },
        args.warmup, args.iters);
    rows.push_back(csv_row(shape, n_w.n(), n_x.n(), "matmul_ap", args.iters, ap_ns));

    if (args.with_oracle) {
      const IntMatrix dw = decoded(w);
      const IntMatrix dx = decoded(x);
      const double oracle_ns = mean_ns(
          [&] {
            const IntMatrix y = naive_matmul(dw, dx);
            g_sink = g_sink ^ static_cast<std::uint32_t>(y.data.front() + y.data.back());
          },
          args.warmup, args.iters);
      rows.push_back(csv_row(shape, n_w.n(), n_x.n(), "naive_oracle", args.iters, oracle_ns));
    }

    if (args.include_pack) {
      const double pack_ns = mean_ns(
          [&] {
            const PackedBitPlanes pw = decompose_and_pack(w);
            const PackedBitPlanes px = decompose_and_pack(x);
            g_sink = g_sink ^ pw.words().front() ^ px.words().front();
          },
          args.warmup, args.iters);
      rows.push_back(csv_row(shape, n_w.n(), n_x.n(), "pack", args.iters, pack_ns));
    }
  }

  std::ostringstream csv;
  csv << "m,n,k,n_w,n_x,kernel,iterations,mean_ns,tops\n";
  for (const std::string& row : rows) csv << row << '\n';
  if (args.csv_path.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream out(args.csv_path, std::ios::trunc);
    if (!out) throw IoError("cannot open " + args.csv_path + " for writing");
    out << csv.str();
    if (!out) throw IoError("short write to " + args.csv_path);
  }
  return 0;
}

// -------------------------------------------------------------- quantize

std::vector<std::uint8_t> read_all_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path + " for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure on " + path);
  return bytes;
}

RealMatrix parse_csv_matrix(const std::vector<std::uint8_t>& bytes) {
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::stringstream stream(std::string(bytes.begin(), bytes.end()));
  std::string line;
  while (std::getline(stream, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::size_t row_cols = 0;
    std::stringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      try {
        std::size_t pos = 0;
        const double v = std::stod(cell, &pos);
        while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
        if (pos != cell.size()) throw std::invalid_argument(cell);
        values.push_back(v);
      } catch (const std::exception&) {
        throw ParseError("cannot parse '" + cell + "' as a number");
      }
      ++row_cols;
    }
    if (rows == 0) {
      cols = row_cols;
    } else if (row_cols != cols) {
      throw ParseError("row " + std::to_string(rows + 1) + " holds " + std::to_string(row_cols) +
                       " values, expected " + std::to_string(cols));
    }
    ++rows;
  }
  if (rows == 0) throw ParseError("input holds no matrix rows");
  return {rows, cols, std::move(values)};
}

RealMatrix transposed(const RealMatrix& m) {
  RealMatrix t(m.cols, m.rows);
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) t.at(c, r) = m.at(r, c);
  }
  return t;
}

struct QuantizeArgs {
  std::string input;
  std::string output;
  int bits = 0;
  std::string granularity = "tensor";
  bool transpose = false;
};

int run_quantize_command(const QuantizeArgs& args) {
  const std::vector<std::uint8_t> bytes = read_all_bytes(args.input);
  RealMatrix real = [&] {
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), "APMM", 4) == 0) {
      return parse_tensor(bytes).to_real();
    }
    return parse_csv_matrix(bytes);
  }();
  if (args.transpose) real = transposed(real);

  const Granularity gran =
      args.granularity == "row" ? Granularity::PerRow : Granularity::PerTensor;
  const QuantizedTensor q = quantize(real, BitWidth(args.bits), gran);
  write_tensor_file(args.output, TensorFile::from_quantized(q));
  std::cerr << "quantized " << real.rows << "x" << real.cols << " at " << args.bits
            << " bits (per-" << (gran == Granularity::PerRow ? "row" : "tensor")
            << " scale) -> " << args.output << "\n";
  return 0;
}

// ---------------------------------------------------------------- matmul

struct MatmulArgs {
  std::string weights;
  std::string features;
  std::string out;
  bool dequant = false;
};

bool wants_csv(const std::string& path) {
  return std::filesystem::path(path).extension() == ".csv";
}

void write_csv_file(const std::string& path, std::size_t rows, std::size_t cols,
                    const std::function<std::string(std::size_t, std::size_t)>& cell) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (c != 0) out << ',';
      out << cell(r, c);
    }
    out << '\n';
  }
  if (!out) throw IoError("short write to " + path);
}

int run_matmul_command(const MatmulArgs& args) {
  const TensorFile wf = read_tensor_file(args.weights);
  const TensorFile xf = read_tensor_file(args.features);
  const PackedBitPlanes wp = wf.to_packed();
  const PackedBitPlanes xp = xf.to_packed();
  const AccumMatrix y = matmul_ap(wp, xp);

  if (args.dequant) {
    const QuantizedTensor wq(unpack(wp), wf.granularity_enum(), wf.scales);
    const QuantizedTensor xq(unpack(xp), xf.granularity_enum(), xf.scales);
    RealMatrix real(y.rows, y.cols);
    for (std::size_t m = 0; m < y.rows; ++m) {
      // Per-row feature scales apply to output columns: X is stored K-major,
      // so its row n is the logical right-hand column n.
      const double sw = wq.scale_for_row(m);
      for (std::size_t n = 0; n < y.cols; ++n) {
        real.at(m, n) = static_cast<double>(y.at(m, n)) * sw * xq.scale_for_row(n);
      }
    }
    if (wants_csv(args.out)) {
      write_csv_file(args.out, real.rows, real.cols, [&](std::size_t r, std::size_t c) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", real.at(r, c));
        return std::string(buf);
      });
    } else {
      write_tensor_file(args.out, TensorFile::from_real(real));
    }
  } else if (wants_csv(args.out)) {
    write_csv_file(args.out, y.rows, y.cols, [&](std::size_t r, std::size_t c) {
      return std::to_string(y.at(r, c));
    });
  } else {
    // Integer results ride in the float32 container; exact up to 2^24 in
    // magnitude. Use a .csv output for guaranteed-exact integers.
    RealMatrix real(y.rows, y.cols);
    for (std::size_t e = 0; e < real.data.size(); ++e) real.data[e] = y.data[e];
    write_tensor_file(args.out, TensorFile::from_real(real));
  }
  std::cerr << y.rows << "x" << y.cols << " result -> " << args.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"arbitrary-precision integer matmul over packed bit planes"};
  app.require_subcommand(1);

  VerifyOptions verify_options;
  CLI::App* verify = app.add_subcommand("verify", "run the randomized property suite");
  verify->add_option("--seed", verify_options.seed, "RNG seed; pins the whole case stream")
      ->capture_default_str();
  verify->add_option("--cases", verify_options.cases, "randomized cases for the main property")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  verify->add_option("--max-dim", verify_options.max_dim, "upper bound for M and N")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  verify->add_option("--max-k", verify_options.max_k, "upper bound for K")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  BenchArgs bench_args;
  CLI::App* bench = app.add_subcommand("bench", "time the kernel and emit CSV");
  bench->add_option("--preset", bench_args.preset, "shape preset")
      ->check(CLI::IsMember({"square", "llama2-7b"}));
  bench->add_option("--shape", bench_args.shape, "single shape M,N,K");
  bench->add_option("--bits", bench_args.bits, "bit widths n_w,n_x")->capture_default_str();
  bench->add_option("--iters", bench_args.iters, "timed iterations per row")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bench->add_option("--warmup", bench_args.warmup, "untimed warmup iterations")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  bench->add_option("--seed", bench_args.seed, "RNG seed for the random operands")
      ->capture_default_str();
  bench->add_option("--csv", bench_args.csv_path, "write CSV here instead of stdout");
  bench->add_flag("--include-pack", bench_args.include_pack,
                  "also time bit-plane packing as a separate row");
  bench->add_flag("--oracle", bench_args.with_oracle,
                  "also time the naive 32-bit reference as a separate row");

  QuantizeArgs quantize_args;
  CLI::App* quantize_cmd =
      app.add_subcommand("quantize", "quantize a float tensor file or CSV matrix");
  quantize_cmd->add_option("input", quantize_args.input, "float tensor file or CSV text matrix")
      ->required();
  quantize_cmd->add_option("output", quantize_args.output, "quantized tensor file to write")
      ->required();
  quantize_cmd->add_option("--bits", quantize_args.bits, "bit width n")
      ->required()
      ->check(CLI::Range(1, 8));
  quantize_cmd->add_option("--granularity", quantize_args.granularity, "scale granularity")
      ->check(CLI::IsMember({"tensor", "row"}))
      ->capture_default_str();
  quantize_cmd->add_flag("--transpose", quantize_args.transpose,
                         "transpose at ingestion (store a right operand K-major)");

  MatmulArgs matmul_args;
  CLI::App* matmul_cmd = app.add_subcommand("matmul", "multiply two quantized tensor files");
  matmul_cmd->add_option("weights", matmul_args.weights, "left operand, M x K")->required();
  matmul_cmd
      ->add_option("features", matmul_args.features, "right operand, stored K-major as N x K")
      ->required();
  matmul_cmd->add_option("--out", matmul_args.out, ".csv for text, anything else for a tensor file")
      ->required();
  matmul_cmd->add_flag("--dequant", matmul_args.dequant,
                       "scale the integer result by s_w * s_x into floats");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (verify->parsed()) return run_verify_command(verify_options);
    if (bench->parsed()) return run_bench_command(bench_args);
    if (quantize_cmd->parsed()) return run_quantize_command(quantize_args);
    return run_matmul_command(matmul_args);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
