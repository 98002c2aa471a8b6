#pragma once

#include "asr/alphabet.hpp"
#include "asr/ngram_lm.hpp"
#include "asr/tensor.hpp"

namespace asr {

/// Per-frame argmax (ties toward the lowest index, so blank wins) followed by
/// the CTC collapse rule.
LabelSeq greedy_decode(const Tensor& log_probs);

struct BeamHyp {
    double p_blank;     // log mass of alignments ending in blank
    double p_nonblank;  // log mass of alignments ending in a character
    double lm_logprob;  // accumulated LM increments for this prefix
    double score(double lm_weight, double length_bonus, std::size_t len) const;
};

/// CTC prefix beam search over collapsed prefixes. `width` bounds both the
/// characters considered per frame (top-width by probability, ties toward
/// the lower index) and the hypotheses kept, so width 1 reproduces
/// greedy_decode and width >= |A|^T is exact. Each extension by character c
/// adds lm_weight * log P_lm(c | context) + length_bonus to the ranking
/// score. Ties between equal scores break toward the lexicographically
/// smaller prefix.
LabelSeq beam_search_decode(const Tensor& log_probs, int width, const NgramLm* lm,
                            double lm_weight, double length_bonus,
                            const std::string& symbols = kDefaultSymbols);

}  // namespace asr
