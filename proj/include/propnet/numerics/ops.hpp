#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "propnet/numerics/rng.hpp"
#include "propnet/numerics/tape.hpp"

// Differentiable primitives. Every function records one node (or a short
// chain of nodes) on the tape that owns its inputs; all inputs of a call
// must share that tape.
namespace propnet::ops {

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
// a + c for a constant tensor c of the same shape.
Var add_constant(Var a, const Tensor& c);
Var sum(Var a);
Var mean(Var a);
Var reshape(Var a, Shape shape);

Var matmul(Var a, Var b);
Var transpose(Var a);
// x[m×n] + bias[n] broadcast over rows.
Var add_row_bias(Var x, Var bias);
// x[K×H×W] + bias[K] broadcast over space.
Var add_channel_bias(Var x, Var bias);

Var relu(Var x);
// Along the last axis, max-subtracted.
Var softmax(Var x);
Var log_softmax(Var x);
// -log softmax(logits)[label] for 1-D logits, via log-sum-exp.
Var cross_entropy(Var logits, std::size_t label);

// Cross-correlation of input[C×H×W] with kernels[K×C×kh×kw].
Var conv2d(Var input, Var kernels, std::size_t stride, std::size_t padding);
Shape conv2d_output_shape(const Shape& input, const Shape& kernels, std::size_t stride,
                          std::size_t padding);
// Non-overlapping max pooling; a ragged border forms a smaller window.
Var max_pool2d(Var x, std::size_t window);
Var global_avg_pool(Var x);
// G[i][j] = sum_hw F[i]F[j] / (K*H*W).
Var gram_matrix(Var features);
// Row-major upper triangle (diagonal included) of a square matrix.
Var upper_triangle(Var square);

// Concatenation along axis 0; trailing extents must agree.
Var concat(std::span<const Var> parts);
Var slice_rows(Var x, std::size_t begin, std::size_t count);
Var slice_cols(Var x, std::size_t begin, std::size_t count);
Var concat_cols(std::span<const Var> parts);
// Row r of a matrix as a 1-D tensor.
Var row(Var x, std::size_t r);

// Rows of table[V×d] selected by ids → [n×d].
Var embedding(Var table, std::span<const int> ids);
// Per-row normalisation of x[n×d] with learned gain and bias.
Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);

Var dropout(Var x, double rate, bool training, Rng& rng);

// Logit assigned to masked-out keys before the softmax.
inline constexpr double kMaskedLogit = -1e30;

struct AttentionProjections {
  Var wq, wk, wv, wo;                    // [d×d]
  std::optional<Var> bq, bk, bv, bo;     // [d]
};

struct AttentionResult {
  Var output;      // [n×d]
  Tensor weights;  // [heads×n×n], rows sum to 1
};

// Scaled dot-product attention split over `heads`; key_mask[j] == 0 hides
// key j from every query. Empty mask means every key is visible.
AttentionResult multi_head_attention(Var q, Var k, Var v, const AttentionProjections& proj,
                                     std::size_t heads, std::span<const int> key_mask = {});

}  // namespace propnet::ops
