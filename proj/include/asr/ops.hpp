#pragma once

#include "asr/graph.hpp"

namespace asr::ops {

// Elementwise binary ops require identical shapes (no broadcasting).
TensorPtr add(Graph& g, const TensorPtr& a, const TensorPtr& b);
TensorPtr sub(Graph& g, const TensorPtr& a, const TensorPtr& b);
TensorPtr mul(Graph& g, const TensorPtr& a, const TensorPtr& b);

/// a * c for a compile-time-known constant c.
TensorPtr scale(Graph& g, const TensorPtr& a, double c);

/// a * s where s is a 1-element tensor; gradients flow to both.
TensorPtr scale_by(Graph& g, const TensorPtr& a, const TensorPtr& s);

TensorPtr sigmoid(Graph& g, const TensorPtr& a);
TensorPtr tanh(Graph& g, const TensorPtr& a);
/// min(max(x, 0), cap) -- the clipped activation used by the acoustic model.
TensorPtr relu_clip(Graph& g, const TensorPtr& a, double cap = 20.0);
TensorPtr exp(Graph& g, const TensorPtr& a);
TensorPtr log(Graph& g, const TensorPtr& a);

/// Standard 2-D matrix product; dA = dC B^T, dB = A^T dC.
TensorPtr matmul(Graph& g, const TensorPtr& a, const TensorPtr& b);

/// mat (T x C) + bias (1 x C or C) broadcast over rows.
TensorPtr add_bias(Graph& g, const TensorPtr& mat, const TensorPtr& bias);

/// Numerically stable softmax over the last dimension (whole vector for 1-D,
/// per row for 2-D).
TensorPtr softmax(Graph& g, const TensorPtr& v);
TensorPtr log_softmax(Graph& g, const TensorPtr& v);

/// Softmax over the entries whose mask bit is set; masked-out entries get
/// exactly 0 and no gradient. `mask` is not differentiated.
TensorPtr masked_softmax(Graph& g, const TensorPtr& v, const std::vector<bool>& mask);

/// Sum of all entries -> 1x1 scalar.
TensorPtr sum(Graph& g, const TensorPtr& a);

/// Slices. Gradients scatter back into the source.
TensorPtr row(Graph& g, const TensorPtr& a, std::int64_t r);
TensorPtr col(Graph& g, const TensorPtr& a, std::int64_t c);
TensorPtr element(Graph& g, const TensorPtr& a, std::int64_t i);

/// Rows of `a` in reverse order (time reversal).
TensorPtr reverse_rows(Graph& g, const TensorPtr& a);

/// Per-row dot product of equal-shape matrices -> T x 1.
TensorPtr rowwise_dot(Graph& g, const TensorPtr& a, const TensorPtr& b);

/// out[t,:] = s[t] * a[t,:] where s is T x 1.
TensorPtr scale_rows(Graph& g, const TensorPtr& a, const TensorPtr& s);

/// Horizontal concatenation of T x c_i matrices.
TensorPtr concat_cols(Graph& g, const std::vector<TensorPtr>& parts);

}  // namespace asr::ops
