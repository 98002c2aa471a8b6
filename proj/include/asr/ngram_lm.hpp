#pragma once

#include <map>
#include <string>
#include <vector>

#include "asr/alphabet.hpp"

namespace asr {

/// Character n-gram language model with add-k smoothing. Vocabulary is the
/// model alphabet minus blank plus a sentence-boundary symbol; contexts are
/// padded with the boundary on the left, and the boundary also serves as the
/// end-of-sequence emission. Unseen contexts fall back to the uniform
/// distribution (which is what add-k gives for zero counts). Immutable after
/// training, freely shareable across decoding threads.
class NgramLm {
public:
    static constexpr char kBoundary = '$';

    /// Trains on whole transcripts. order in 1..4, k > 0.
    static NgramLm train(const std::vector<std::string>& texts, int order, double k,
                         const std::string& symbols = kDefaultSymbols);

    /// log P(c | context); `context` is the full preceding text (the model
    /// keeps the last order-1 characters, boundary-padded). `c` may be
    /// kBoundary for the end-of-sequence event.
    double cond_logprob(const std::string& context, char c) const;

    /// Sum of conditional log probs with boundary padding, including the
    /// final end-of-sequence term.
    double sequence_logprob(const std::string& text) const;

    int order() const { return order_; }
    double smoothing() const { return k_; }
    const std::string& symbols() const { return symbols_; }
    std::int64_t vocab_size() const { return static_cast<std::int64_t>(symbols_.size()) + 1; }

    /// Plain-text serialization: header, then one sorted
    /// "context<TAB>char<TAB>logprob" record per (observed context, vocab
    /// char). save(load(f)) is byte-identical to f.
    void save(const std::string& path) const;
    static NgramLm load(const std::string& path);

private:
    NgramLm() = default;

    std::string context_key(const std::string& context) const;

    int order_ = 1;
    double k_ = 1.0;
    std::string symbols_;
    double uniform_logprob_ = 0.0;
    // observed context -> per-character log probability (full vocab row)
    std::map<std::string, std::map<char, double>> table_;
};

}  // namespace asr
