#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "apmm/kernel.hpp"

namespace apmm {

/// Randomized kernel-vs-oracle verification: one seeded case stream shared
/// by every property class, so a seed pins the whole suite.
struct VerifyOptions {
  std::uint64_t seed = 1;
  int cases = 1000;
  std::size_t max_dim = 32;  // upper bound for M and N
  std::size_t max_k = 200;   // upper bound for K (ragged values included)
};

/// Kernel under test. Defaults to matmul_ap; tests substitute corrupted
/// kernels to prove the suite catches mismatches.
using KernelFn =
    std::function<AccumMatrix(const PackedBitPlanes&, const PackedBitPlanes&, const TileConfig&)>;

struct PropertyResult {
  std::string name;
  int cases = 0;
  bool passed = true;
  std::string detail;  // first counterexample when failed
};

struct VerifyReport {
  std::vector<PropertyResult> properties;

  bool all_passed() const {
    for (const auto& p : properties)
      if (!p.passed) return false;
    return true;
  }
};

VerifyReport run_verify(const VerifyOptions& options, const KernelFn& kernel = {});

}  // namespace apmm
