#pragma once

#include "asr/alphabet.hpp"
#include "asr/graph.hpp"

namespace asr {

/// Minimum frame count that can align `labels` (length + adjacent repeats).
std::int64_t ctc_min_frames(const LabelSeq& labels);

/// Merge adjacent repeats, then delete blanks (index 0).
LabelSeq collapse_path(const std::vector<int>& path);

/// Negative log probability of all alignments of `labels` under the standard
/// CTC collapse rule; forward-backward lattice recursion in log space.
/// log_probs is T x |A| with blank at column 0. Throws CtcInfeasibleError when
/// T < ctc_min_frames(labels).
TensorPtr ctc_loss(Graph& g, const TensorPtr& log_probs, const LabelSeq& labels);

/// Test oracle: sums path probabilities over every |A|^T frame path whose
/// collapse equals `labels`. Refuses instances with T > 8 or |A| > 5. Returns
/// +inf when no path matches.
double ctc_loss_bruteforce(const Tensor& log_probs, const LabelSeq& labels);

}  // namespace asr
