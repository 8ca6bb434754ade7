#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "bhs/ad/graph.hpp"
#include "bhs/ad/tensor.hpp"

namespace bhs::ad {

// Elementwise ops require identical shapes and throw Error(kShapeMismatch)
// otherwise. "Rows" below means all leading dimensions flattened, with the
// last dimension as columns.

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double k);
Var tanh(const Var& x);
Var sigmoid(const Var& x);

/// Sum of all entries, shape [1].
Var sum(const Var& x);

/// x [..., k] + b [k].
Var add_bias(const Var& x, const Var& b);

/// x [B, n, k] + y [B, k], with y repeated over the n positions.
Var add_broadcast(const Var& x, const Var& y);

/// a [..., k] · b [k, m] → [..., m].
Var matmul(const Var& a, const Var& b);

/// matmul(x, w) + b in one node.
Var linear(const Var& x, const Var& w, const Var& b);

/// Columns [start, start + count) of the last dimension.
Var slice_last(const Var& x, std::size_t start, std::size_t count);

/// Entries [start, start + count) of the first dimension.
Var slice_first(const Var& x, std::size_t start, std::size_t count);

/// Concatenation along the last dimension; leading dimensions must agree.
Var concat_last(const std::vector<Var>& parts);

Var reshape(const Var& x, Shape shape);

/// Rows of `table` [V, d] gathered by `ids`; output shape ids_shape + [d].
/// Throws Error(kIndexOutOfRange) for an id outside [0, V).
Var embedding(const Var& table, std::span<const std::int32_t> ids, const Shape& ids_shape);

/// Valid cross-correlation. x [B, n, d_in] (or [n, d_in]), kernels
/// [w, d_in, d_out], bias [d_out] → [B, n − w + 1, d_out]:
///   out[b, t, o] = bias[o] + Σ_{k,i} x[b, t + k, i] · kernels[k, i, o]
Var conv1d(const Var& x, const Var& kernels, const Var& bias);

/// x [B, n, d] → x[:, t, :] of shape [B, d].
Var time_step(const Var& x, std::size_t t);

/// n tensors [B, d] → [B, n, d].
Var stack_steps(const std::vector<Var>& steps);

/// Softmax over the last dimension, max-shifted.
Var softmax_rows(const Var& x);

/// alpha [B, n], h [B, n, d] → Σ_i alpha[b, i] · h[b, i, :] of shape [B, d].
Var weighted_sum(const Var& alpha, const Var& h);

/// x ⊙ mask with a constant mask of the same shape.
Var apply_mask(const Var& x, const Tensor& mask);

/// Inverted dropout drawing its mask from the graph RNG. Identity in eval
/// mode or at rate 0. Throws Error(kInvalidArgument) unless 0 ≤ rate < 1.
Var dropout(const Var& x, double rate);

/// Mean over rows of −log(max(softmax(logits)[target], 1e-12)).
/// logits [B, C]; throws Error(kIndexOutOfRange) for a target ≥ C.
Var softmax_cross_entropy(const Var& logits, std::span<const std::size_t> targets);

// ---------------------------------------------------------------------------
// Graph-free helpers
// ---------------------------------------------------------------------------

inline constexpr double kProbabilityFloor = 1e-12;

std::vector<double> softmax(std::span<const double> z);

/// −log(max(probs[target], 1e-12)). Throws Error(kIndexOutOfRange).
double cross_entropy(std::span<const double> probs, std::size_t target);

/// Keep-mask scaled by 1/(1 − rate): each entry is 0 with probability rate.
Tensor dropout_mask(const Shape& shape, double rate, std::mt19937_64& rng);

Tensor dropout(const Tensor& x, double rate, Mode mode, std::uint64_t seed);

}  // namespace bhs::ad
