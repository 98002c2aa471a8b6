#pragma once

// Shared test-only helpers and independent oracles. These stay out of the
// library so the implementations they check cannot leak into them.

#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "asr/alphabet.hpp"
#include "asr/ctc.hpp"
#include "asr/model.hpp"
#include "asr/rng.hpp"

namespace test {

inline asr::TensorPtr random_tensor(const std::vector<std::int64_t>& shape, asr::Rng& rng,
                                    double lo = -1.0, double hi = 1.0, bool requires_grad = true) {
    return asr::Tensor::uniform(shape, lo, hi, rng, requires_grad);
}

/// Random per-frame log-probabilities (a proper log_softmax output).
inline asr::TensorPtr random_log_probs(std::int64_t t, std::int64_t a, asr::Rng& rng) {
    auto out = asr::Tensor::zeros({t, a});
    for (std::int64_t i = 0; i < t; ++i) {
        double z = 0.0;
        std::vector<double> row(static_cast<std::size_t>(a));
        for (auto& v : row) {
            v = std::exp(rng.uniform(-2.0, 2.0));
            z += v;
        }
        for (std::int64_t j = 0; j < a; ++j) {
            out->at(i, j) = std::log(row[static_cast<std::size_t>(j)] / z);
        }
    }
    return out;
}

/// Random feasible CTC labels for the given frame budget.
inline asr::LabelSeq random_feasible_labels(std::int64_t t, std::int64_t a, std::int64_t max_len,
                                            asr::Rng& rng) {
    while (true) {
        const std::int64_t len = 1 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(max_len)));
        asr::LabelSeq labels;
        for (std::int64_t i = 0; i < len; ++i) {
            labels.push_back(1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(a - 1))));
        }
        if (asr::ctc_min_frames(labels) <= t) return labels;
    }
}

/// Exhaustive best collapsed transcription by total path probability;
/// ties go to the lexicographically smaller sequence.
inline asr::LabelSeq exhaustive_best_transcript(const asr::Tensor& log_probs) {
    const std::int64_t t_len = log_probs.shape[0];
    const std::int64_t a = log_probs.shape[1];
    std::map<asr::LabelSeq, double> mass;  // collapsed -> log total

    auto logaddexp = [](double x, double y) {
        if (x == -std::numeric_limits<double>::infinity()) return y;
        if (y == -std::numeric_limits<double>::infinity()) return x;
        const double m = std::max(x, y);
        return m + std::log1p(std::exp(-std::fabs(x - y)));
    };

    std::vector<int> path(static_cast<std::size_t>(t_len), 0);
    while (true) {
        double lp = 0.0;
        for (std::int64_t t = 0; t < t_len; ++t) {
            lp += log_probs.data[static_cast<std::size_t>(t * a + path[static_cast<std::size_t>(t)])];
        }
        const asr::LabelSeq key = asr::collapse_path(path);
        auto it = mass.find(key);
        if (it == mass.end()) {
            mass.emplace(key, lp);
        } else {
            it->second = logaddexp(it->second, lp);
        }
        std::int64_t pos = t_len - 1;
        while (pos >= 0) {
            if (++path[static_cast<std::size_t>(pos)] < a) break;
            path[static_cast<std::size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) break;
    }

    const asr::LabelSeq* best = nullptr;
    double best_mass = -std::numeric_limits<double>::infinity();
    for (const auto& [seq, lp] : mass) {  // lexicographic order; first max wins
        if (best == nullptr || lp > best_mass) {
            best = &seq;
            best_mass = lp;
        }
    }
    return *best;
}

/// Tiny full-model config for gradient checks.
inline asr::ModelConfig tiny_config(const asr::AttentionSpec& attention) {
    asr::ModelConfig cfg;
    cfg.feature_dim = 4;
    cfg.gru_hidden = 5;
    cfg.conv.kernel_width = 3;
    cfg.conv.stride = 1;
    cfg.conv.out_channels = 5;
    cfg.attention = attention;
    return cfg;
}

}  // namespace test
