#pragma once

#include "apmm/bipolar.hpp"
#include "apmm/matrix.hpp"

namespace apmm {

// Reference implementations kept deliberately simple and independent of the
// packed kernel path. Speed is a non-goal here.

/// Ground-truth triple loop. The right operand is supplied K-major (N x K),
/// matching the kernel convention. 64-bit internal accumulation with checked
/// narrowing to 32-bit.
IntMatrix naive_matmul(const IntMatrix& a, const IntMatrix& b_k_major);

/// Elementwise decode of a code matrix.
IntMatrix decoded(const CodeMatrix& codes);

/// Reference semantics of the whole pipeline: naive_matmul of the decoded
/// operands.
IntMatrix decoded_matmul(const CodeMatrix& weights, const CodeMatrix& features);

/// Unsigned 1-bit construction: 2 * (W_hat X) - (J X) with J all ones, which
/// equals (2 W_hat - J) X. W_hat entries must be 0 or 1.
IntMatrix apnn_unsigned_1bit(const IntMatrix& w_hat, const IntMatrix& x);

}  // namespace apmm
