#include "apmm/verify.hpp"

#include <cstdlib>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "apmm/bipolar.hpp"
#include "apmm/bitplane.hpp"
#include "apmm/oracle.hpp"
#include "apmm/rng.hpp"

namespace apmm {

namespace {

CodeMatrix random_codes(Rng& rng, std::size_t rows, std::size_t cols, BitWidth width) {
  std::vector<std::uint8_t> bits(rows * cols);
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng.below(width.code_count()));
  return {rows, cols, width, std::move(bits)};
}

IntMatrix random_ints(Rng& rng, std::size_t rows, std::size_t cols, int lo, int hi) {
  IntMatrix m(rows, cols);
  for (auto& v : m.data) {
    v = lo + static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
  }
  return m;
}

std::string format_matrix(const IntMatrix& m) {
  if (m.data.size() > 400) {
    return "<" + std::to_string(m.rows) + "x" + std::to_string(m.cols) + " matrix elided>";
  }
  std::ostringstream out;
  out << '[';
  for (std::size_t r = 0; r < m.rows; ++r) {
    out << (r == 0 ? "[" : " [");
    for (std::size_t c = 0; c < m.cols; ++c) {
      if (c != 0) out << ',';
      out << m.at(r, c);
    }
    out << ']';
  }
  out << ']';
  return out.str();
}

std::string format_row(const IntMatrix& m, std::size_t r) {
  std::ostringstream out;
  out << '[';
  for (std::size_t c = 0; c < m.cols; ++c) {
    if (c != 0) out << ',';
    out << m.at(r, c);
  }
  out << ']';
  return out.str();
}

/// First position where two same-shaped matrices differ, formatted as the
/// canonical counterexample: (W, X, n_w, n_x, position, expected, got).
std::string first_mismatch(const IntMatrix& w, const IntMatrix& x, const IntMatrix& expected,
                           const IntMatrix& got, int case_index) {
  for (std::size_t r = 0; r < expected.rows; ++r) {
    for (std::size_t c = 0; c < expected.cols; ++c) {
      if (expected.at(r, c) == got.at(r, c)) continue;
      std::ostringstream out;
      out << "case " << case_index << ": M=" << w.rows << " N=" << x.rows << " K=" << w.cols
          << "; W=" << format_matrix(w) << " X=" << format_matrix(x) << "; W row " << r << " = "
          << format_row(w, r) << ", X row " << c << " = " << format_row(x, c) << "; at (" << r
          << "," << c << ") expected " << expected.at(r, c) << ", got " << got.at(r, c);
      return out.str();
    }
  }
  return "shapes differ";
}

struct CaseShape {
  std::size_t m, n, k;
  BitWidth n_w, n_x;
};

CaseShape draw_shape(Rng& rng, const VerifyOptions& opt) {
  return {rng.range(1, opt.max_dim), rng.range(1, opt.max_dim), rng.range(1, opt.max_k),
          BitWidth(static_cast<int>(rng.range(1, 8))), BitWidth(static_cast<int>(rng.range(1, 8)))};
}

PropertyResult kernel_vs_oracle(Rng& rng, const VerifyOptions& opt, const KernelFn& kernel) {
  PropertyResult result{"kernel-vs-oracle", opt.cases, true, ""};
  for (int i = 0; i < opt.cases; ++i) {
    const CaseShape s = draw_shape(rng, opt);
    const CodeMatrix w = random_codes(rng, s.m, s.k, s.n_w);
    const CodeMatrix x = random_codes(rng, s.n, s.k, s.n_x);
    const IntMatrix expected = decoded_matmul(w, x);
    const AccumMatrix got = kernel(decompose_and_pack(w), decompose_and_pack(x), TileConfig{});
    if (got != expected) {
      result.passed = false;
      result.detail = "n_w=" + std::to_string(s.n_w.n()) + " n_x=" + std::to_string(s.n_x.n()) +
                      "; " + first_mismatch(decoded(w), decoded(x), expected, got, i);
      break;
    }
  }
  return result;
}

PropertyResult schedule_independence(Rng& rng, const VerifyOptions& opt, const KernelFn& kernel) {
  const int cases = std::max(1, opt.cases / 50);
  PropertyResult result{"schedule-independence", cases, true, ""};
  for (int i = 0; i < cases; ++i) {
    const CaseShape s = draw_shape(rng, opt);
    const PackedBitPlanes wp = decompose_and_pack(random_codes(rng, s.m, s.k, s.n_w));
    const PackedBitPlanes xp = decompose_and_pack(random_codes(rng, s.n, s.k, s.n_x));
    const AccumMatrix reference = kernel(wp, xp, TileConfig{});
    const TileConfig configs[] = {
        {1, 1, 32},
        {1, 7, 32},
        {5, 1, 64},
        {s.m + 7, s.n + 3, 32},
        {3, 5, 96},
        {2 * opt.max_dim, 2 * opt.max_dim, 2048},
        {s.m, s.n, 32 * ((s.k + 31) / 32)},
        {rng.range(1, 2 * opt.max_dim), rng.range(1, 2 * opt.max_dim), 32 * rng.range(1, 64)},
    };
    for (const TileConfig& cfg : configs) {
      const AccumMatrix got = kernel(wp, xp, cfg);
      if (got != reference) {
        result.passed = false;
        std::ostringstream out;
        out << "case " << i << ": M=" << s.m << " N=" << s.n << " K=" << s.k
            << " n_w=" << s.n_w.n() << " n_x=" << s.n_x.n() << "; config (" << cfg.block_rows()
            << "," << cfg.block_cols() << "," << cfg.block_k_bits()
            << ") disagrees with the default schedule";
        result.detail = out.str();
        return result;
      }
    }
  }
  return result;
}

PropertyResult xor_identity(Rng& rng, const VerifyOptions& opt) {
  PropertyResult result{"xor-identity", opt.cases, true, ""};
  for (int i = 0; i < opt.cases; ++i) {
    const std::size_t k = rng.range(1, opt.max_k);
    const std::size_t words = (k + 31) / 32;
    std::vector<std::uint32_t> a(words);
    for (auto& w : a) w = rng.next_u32();
    const std::size_t tail = k % 32;
    const std::uint32_t lane_mask = tail == 0 ? ~std::uint32_t{0} : (std::uint32_t{1} << tail) - 1;
    a.back() &= lane_mask;
    std::vector<std::uint32_t> flipped(words);
    for (std::size_t w = 0; w < words; ++w) flipped[w] = ~a[w];
    flipped.back() &= lane_mask;

    const std::int64_t self = dot_1bit_xor(a, a, k);
    const std::int64_t anti = dot_1bit_xor(a, flipped, k);
    if (self != static_cast<std::int64_t>(k) || anti != -static_cast<std::int64_t>(k)) {
      result.passed = false;
      result.detail = "case " + std::to_string(i) + ": k=" + std::to_string(k) + " dot(a,a)=" +
                      std::to_string(self) + " dot(a,~a)=" + std::to_string(anti);
      break;
    }
  }
  return result;
}

PropertyResult plane_negation(Rng& rng, const VerifyOptions& opt) {
  const int cases = std::max(1, opt.cases / 20);
  PropertyResult result{"plane-negation", cases, true, ""};
  for (int i = 0; i < cases; ++i) {
    const std::size_t m = rng.range(1, 8);
    const std::size_t n = rng.range(1, 8);
    const std::size_t k = rng.range(1, 64);
    const BitWidth n_w(static_cast<int>(rng.range(1, 4)));
    const BitWidth n_x(static_cast<int>(rng.range(1, 4)));
    const CodeMatrix w = random_codes(rng, m, k, n_w);
    const CodeMatrix x = random_codes(rng, n, k, n_x);
    const unsigned plane = static_cast<unsigned>(rng.below(static_cast<std::uint64_t>(n_w.n())));

    const PackedBitPlanes xp = decompose_and_pack(x);
    const PlaneProductStack stack = compute_plane_products(decompose_and_pack(w), xp);
    const AccumMatrix before = recover(stack);

    // Flip every bit of the chosen weight plane; its products must negate
    // and recovery must drop by exactly twice that plane's contribution.
    std::vector<std::uint8_t> bits(w.raw_bits().begin(), w.raw_bits().end());
    for (auto& b : bits) b ^= static_cast<std::uint8_t>(1u << plane);
    const CodeMatrix w_flipped(m, k, n_w, std::move(bits));
    const PlaneProductStack flipped_stack =
        compute_plane_products(decompose_and_pack(w_flipped), xp);
    const AccumMatrix after = recover(flipped_stack);

    bool ok = true;
    for (int j = 0; ok && j < n_x.n(); ++j) {
      const IntMatrix& p = stack.product(plane, static_cast<unsigned>(j));
      const IntMatrix& q = flipped_stack.product(plane, static_cast<unsigned>(j));
      for (std::size_t e = 0; e < p.data.size(); ++e) {
        if (q.data[e] != -p.data[e]) {
          ok = false;
          break;
        }
      }
    }
    if (ok) {
      for (std::size_t e = 0; e < before.data.size(); ++e) {
        std::int64_t contribution = 0;
        for (int j = 0; j < n_x.n(); ++j) {
          contribution += (std::int64_t{1} << (plane + static_cast<unsigned>(j))) *
                          stack.product(plane, static_cast<unsigned>(j)).data[e];
        }
        if (after.data[e] != before.data[e] - 2 * contribution) {
          ok = false;
          break;
        }
      }
    }
    if (!ok) {
      result.passed = false;
      result.detail = "case " + std::to_string(i) + ": M=" + std::to_string(m) + " N=" +
                      std::to_string(n) + " K=" + std::to_string(k) + " plane " +
                      std::to_string(plane) + " does not negate cleanly";
      break;
    }
  }
  return result;
}

PropertyResult intermediate_range(Rng& rng, const VerifyOptions& opt) {
  const int cases = std::max(1, opt.cases / 20);
  PropertyResult result{"intermediate-range", cases, true, ""};
  for (int i = 0; i < cases; ++i) {
    const std::size_t m = rng.range(1, 8);
    const std::size_t n = rng.range(1, 8);
    const std::size_t k = rng.range(1, opt.max_k);
    const BitWidth n_w(static_cast<int>(rng.range(1, 8)));
    const BitWidth n_x(static_cast<int>(rng.range(1, 8)));
    const PlaneProductStack stack =
        compute_plane_products(decompose_and_pack(random_codes(rng, m, k, n_w)),
                               decompose_and_pack(random_codes(rng, n, k, n_x)));
    const std::int64_t k_bound = static_cast<std::int64_t>(k);
    const std::int64_t y_bound = overflow_bound(n_w, n_x, k);
    bool ok = true;
    for (int wi = 0; ok && wi < n_w.n(); ++wi) {
      for (int xj = 0; ok && xj < n_x.n(); ++xj) {
        for (std::int32_t v : stack.product(static_cast<unsigned>(wi), static_cast<unsigned>(xj))
                                  .data) {
          if (v > k_bound || v < -k_bound) {
            ok = false;
            break;
          }
        }
      }
    }
    if (ok) {
      for (std::int32_t v : recover(stack).data) {
        if (v > y_bound || v < -y_bound) {
          ok = false;
          break;
        }
      }
    }
    if (!ok) {
      result.passed = false;
      result.detail = "case " + std::to_string(i) + ": K=" + std::to_string(k) + " n_w=" +
                      std::to_string(n_w.n()) + " n_x=" + std::to_string(n_x.n()) +
                      " produced an out-of-range entry";
      break;
    }
  }
  return result;
}

PropertyResult determinism(Rng& rng, const VerifyOptions& opt, const KernelFn& kernel) {
  const int cases = std::max(1, opt.cases / 50);
  PropertyResult result{"determinism", cases, true, ""};
  for (int i = 0; i < cases; ++i) {
    const CaseShape s = draw_shape(rng, opt);
    const CodeMatrix w = random_codes(rng, s.m, s.k, s.n_w);
    const CodeMatrix x = random_codes(rng, s.n, s.k, s.n_x);
    const PackedBitPlanes wp1 = decompose_and_pack(w);
    const PackedBitPlanes wp2 = decompose_and_pack(w);
    const PackedBitPlanes xp = decompose_and_pack(x);
    if (wp1 != wp2 || kernel(wp1, xp, TileConfig{}) != kernel(wp2, xp, TileConfig{})) {
      result.passed = false;
      result.detail = "case " + std::to_string(i) + ": repeated run differs (M=" +
                      std::to_string(s.m) + " N=" + std::to_string(s.n) + " K=" +
                      std::to_string(s.k) + ")";
      break;
    }
  }
  return result;
}

PropertyResult unsigned_identity(Rng& rng, const VerifyOptions& opt, const KernelFn& kernel) {
  const int cases = std::max(1, opt.cases / 10);
  PropertyResult result{"unsigned-identity", cases, true, ""};
  for (int i = 0; i < cases; ++i) {
    const std::size_t m = rng.range(1, opt.max_dim);
    const std::size_t n = rng.range(1, opt.max_dim);
    const std::size_t k = rng.range(1, opt.max_k);
    const IntMatrix w_hat = random_ints(rng, m, k, 0, 1);
    const IntMatrix x = random_ints(rng, n, k, -50, 50);

    IntMatrix recentred(m, k);
    for (std::size_t e = 0; e < recentred.data.size(); ++e) {
      recentred.data[e] = 2 * w_hat.data[e] - 1;
    }
    const IntMatrix via_unsigned = apnn_unsigned_1bit(w_hat, x);
    const IntMatrix via_bipolar = naive_matmul(recentred, x);
    if (via_unsigned != via_bipolar) {
      result.passed = false;
      result.detail = "n_w=1 n_x=1; " + first_mismatch(w_hat, x, via_bipolar, via_unsigned, i);
      break;
    }

    // Same construction against the packed kernel, with X forced bipolar.
    IntMatrix x_bipolar(n, k);
    for (auto& v : x_bipolar.data) v = rng.below(2) == 0 ? -1 : 1;
    std::vector<int> w_values(recentred.data.begin(), recentred.data.end());
    std::vector<int> x_values(x_bipolar.data.begin(), x_bipolar.data.end());
    const AccumMatrix via_kernel =
        kernel(decompose_and_pack(CodeMatrix::from_values(m, k, BitWidth(1), w_values)),
               decompose_and_pack(CodeMatrix::from_values(n, k, BitWidth(1), x_values)),
               TileConfig{});
    const IntMatrix expected = apnn_unsigned_1bit(w_hat, x_bipolar);
    if (via_kernel != expected) {
      result.passed = false;
      result.detail =
          "n_w=1 n_x=1; " + first_mismatch(recentred, x_bipolar, expected, via_kernel, i);
      break;
    }
  }
  return result;
}

PropertyResult oracle_bilinearity(Rng& rng, const VerifyOptions& opt) {
  const int cases = std::max(1, opt.cases / 50);
  PropertyResult result{"oracle-bilinearity", cases, true, ""};
  for (int i = 0; i < cases; ++i) {
    const std::size_t m = rng.range(1, opt.max_dim);
    const std::size_t n = rng.range(1, opt.max_dim);
    const std::size_t k = rng.range(1, opt.max_k);
    const IntMatrix a = random_ints(rng, m, k, -100, 100);
    const IntMatrix b = random_ints(rng, n, k, -100, 100);
    const std::size_t row = rng.below(m);
    const std::int32_t scale = static_cast<std::int32_t>(rng.range(0, 10)) - 5;

    IntMatrix scaled = a;
    for (std::size_t c = 0; c < k; ++c) scaled.at(row, c) *= scale;
    const IntMatrix base = naive_matmul(a, b);
    const IntMatrix got = naive_matmul(scaled, b);
    bool ok = true;
    for (std::size_t nn = 0; nn < n && ok; ++nn) {
      if (got.at(row, nn) != scale * base.at(row, nn)) ok = false;
    }
    for (std::size_t r = 0; r < m && ok; ++r) {
      if (r == row) continue;
      for (std::size_t nn = 0; nn < n && ok; ++nn) {
        if (got.at(r, nn) != base.at(r, nn)) ok = false;
      }
    }
    if (!ok) {
      result.passed = false;
      result.detail = "case " + std::to_string(i) + ": scaling row " + std::to_string(row) +
                      " by " + std::to_string(scale) + " is not linear in the output";
      break;
    }
  }
  return result;
}

PropertyResult overflow_guard(const KernelFn& kernel) {
  PropertyResult result{"overflow-guard", 3, true, ""};

  // Largest admissible K at n_w=n_x=8 is floor((2^31-1)/255^2) = 33025.
  const BitWidth w8(8);
  if (overflow_bound(w8, w8, 33025) > std::numeric_limits<std::int32_t>::max() ||
      overflow_bound(w8, w8, 33026) <= std::numeric_limits<std::int32_t>::max()) {
    result.passed = false;
    result.detail = "overflow_bound misplaces the 32-bit boundary at n_w=n_x=8";
    return result;
  }

  Rng rng(99);
  const PackedBitPlanes wp = decompose_and_pack(random_codes(rng, 1, 33026, w8));
  const PackedBitPlanes xp = decompose_and_pack(random_codes(rng, 1, 33026, w8));
  bool threw = false;
  try {
    kernel(wp, xp, TileConfig{});
  } catch (const OverflowBound&) {
    threw = true;
  }
  if (!threw) {
    result.passed = false;
    result.detail = "matmul_ap accepted K=33026 at n_w=n_x=8 (bound exceeds 32-bit range)";
    return result;
  }

  // One lane under the boundary must be accepted and agree with the oracle.
  const CodeMatrix w = random_codes(rng, 1, 33025, w8);
  const CodeMatrix x = random_codes(rng, 1, 33025, w8);
  const AccumMatrix got = kernel(decompose_and_pack(w), decompose_and_pack(x), TileConfig{});
  if (got != decoded_matmul(w, x)) {
    result.passed = false;
    result.detail = "K=33025 at n_w=n_x=8 disagrees with the oracle";
  }
  return result;
}

}  // namespace

VerifyReport run_verify(const VerifyOptions& options, const KernelFn& kernel) {
  if (options.cases < 1) throw OutOfRange("cases must be at least 1");
  if (options.max_dim < 1 || options.max_k < 1) {
    throw OutOfRange("dimension bounds must be at least 1");
  }
  const KernelFn fn = kernel ? kernel : [](const PackedBitPlanes& w, const PackedBitPlanes& x,
                                           const TileConfig& cfg) { return matmul_ap(w, x, cfg); };

  // One master stream; each property draws its private seed from it, so a
  // single seed pins every case in the suite.
  Rng master(options.seed);
  const std::uint64_t seeds[8] = {master.next_u64(), master.next_u64(), master.next_u64(),
                                  master.next_u64(), master.next_u64(), master.next_u64(),
                                  master.next_u64(), master.next_u64()};

  VerifyReport report;
  {
    Rng rng(seeds[0]);
    report.properties.push_back(kernel_vs_oracle(rng, options, fn));
  }
  {
    Rng rng(seeds[1]);
    report.properties.push_back(schedule_independence(rng, options, fn));
  }
  {
    Rng rng(seeds[2]);
    report.properties.push_back(xor_identity(rng, options));
  }
  {
    Rng rng(seeds[3]);
    report.properties.push_back(plane_negation(rng, options));
  }
  {
    Rng rng(seeds[4]);
    report.properties.push_back(intermediate_range(rng, options));
  }
  {
    Rng rng(seeds[5]);
    report.properties.push_back(determinism(rng, options, fn));
  }
  {
    Rng rng(seeds[6]);
    report.properties.push_back(unsigned_identity(rng, options, fn));
  }
  {
    Rng rng(seeds[7]);
    report.properties.push_back(oracle_bilinearity(rng, options));
  }
  report.properties.push_back(overflow_guard(fn));
  return report;
}

}  // namespace apmm
