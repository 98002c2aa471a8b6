#pragma once

#include <string>
#include <vector>

namespace asr {

struct EditOps {
    std::int64_t substitutions = 0;
    std::int64_t deletions = 0;
    std::int64_t insertions = 0;

    std::int64_t total() const { return substitutions + deletions + insertions; }
};

/// Lowercase + whitespace word tokenization.
std::vector<std::string> tokenize_words(const std::string& text);

/// Minimal word-level edit ops. Among minimal-cost alignments the one with
/// the most matched/substituted positions is chosen (substitution preferred
/// over deletion and insertion), which pins (S, D, I) uniquely and makes the
/// decomposition symmetric up to the D/I swap.
EditOps edit_distance(const std::vector<std::string>& ref, const std::vector<std::string>& hyp);

/// Corpus-level (pooled) WER: sum(S+D+I) / sum(reference words). May exceed 1
/// with enough insertions. Throws on an empty reference corpus.
double pooled_wer(std::int64_t total_errors, std::int64_t total_ref_words);

}  // namespace asr
