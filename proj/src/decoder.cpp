#include "asr/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "asr/ctc.hpp"
#include "asr/errors.hpp"

namespace asr {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logaddexp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::fabs(a - b)));
}

}  // namespace

LabelSeq greedy_decode(const Tensor& log_probs) {
    if (log_probs.ndim() != 2) throw ShapeError("greedy_decode: log_probs must be T x |A|");
    const std::int64_t t_len = log_probs.shape[0];
    const std::int64_t a = log_probs.shape[1];
    std::vector<int> path;
    path.reserve(static_cast<std::size_t>(t_len));
    for (std::int64_t t = 0; t < t_len; ++t) {
        const double* row = log_probs.data.data() + t * a;
        int best = 0;
        for (std::int64_t k = 1; k < a; ++k) {
            if (row[k] > row[best]) best = static_cast<int>(k);
        }
        path.push_back(best);
    }
    return collapse_path(path);
}

double BeamHyp::score(double lm_weight, double length_bonus, std::size_t len) const {
    return logaddexp(p_blank, p_nonblank) + lm_weight * lm_logprob +
           length_bonus * static_cast<double>(len);
}

LabelSeq beam_search_decode(const Tensor& log_probs, int width, const NgramLm* lm,
                            double lm_weight, double length_bonus, const std::string& symbols) {
    if (log_probs.ndim() != 2) throw ShapeError("beam_search: log_probs must be T x |A|");
    if (width < 1) throw ContractError("beam_search: width must be >= 1");
    const std::int64_t t_len = log_probs.shape[0];
    const std::int64_t a = log_probs.shape[1];

    auto lm_step = [&](const LabelSeq& prefix, int c) -> double {
        if (!lm) return 0.0;
        return lm->cond_logprob(labels_to_text(prefix, symbols), symbols[static_cast<std::size_t>(c - 1)]);
    };

    // std::map keeps prefixes in lexicographic order, which is the tie-break.
    std::map<LabelSeq, BeamHyp> beam;
    beam[{}] = BeamHyp{0.0, kNegInf, 0.0};

    std::vector<int> candidates(static_cast<std::size_t>(a));
    for (std::int64_t t = 0; t < t_len; ++t) {
        const double* row = log_probs.data.data() + t * a;
        std::iota(candidates.begin(), candidates.end(), 0);
        std::stable_sort(candidates.begin(), candidates.end(),
                         [&](int x, int y) { return row[x] > row[y]; });
        const std::size_t top = std::min<std::size_t>(static_cast<std::size_t>(width),
                                                      static_cast<std::size_t>(a));

        std::map<LabelSeq, BeamHyp> next;
        auto slot = [&](const LabelSeq& prefix, double lm_total) -> BeamHyp& {
            auto it = next.find(prefix);
            if (it == next.end()) {
                it = next.emplace(prefix, BeamHyp{kNegInf, kNegInf, lm_total}).first;
            }
            return it->second;
        };

        for (const auto& [prefix, hyp] : beam) {
            const int last = prefix.empty() ? -1 : prefix.back();
            const double total = logaddexp(hyp.p_blank, hyp.p_nonblank);
            for (std::size_t ci = 0; ci < top; ++ci) {
                const int c = candidates[ci];
                const double lp = row[c];
                if (c == 0) {
                    auto& h = slot(prefix, hyp.lm_logprob);
                    h.p_blank = logaddexp(h.p_blank, total + lp);
                } else if (c == last) {
                    // Repeat merges into the same prefix; only the blank-path
                    // mass spawns the doubled character.
                    auto& same = slot(prefix, hyp.lm_logprob);
                    same.p_nonblank = logaddexp(same.p_nonblank, hyp.p_nonblank + lp);
                    if (hyp.p_blank != kNegInf) {
                        LabelSeq ext = prefix;
                        ext.push_back(c);
                        auto& h = slot(ext, hyp.lm_logprob + lm_step(prefix, c));
                        h.p_nonblank = logaddexp(h.p_nonblank, hyp.p_blank + lp);
                    }
                } else {
                    LabelSeq ext = prefix;
                    ext.push_back(c);
                    auto& h = slot(ext, hyp.lm_logprob + lm_step(prefix, c));
                    h.p_nonblank = logaddexp(h.p_nonblank, total + lp);
                }
            }
        }

        if (next.empty()) continue;
        if (next.size() > static_cast<std::size_t>(width)) {
            std::vector<std::pair<const LabelSeq*, double>> ranked;
            ranked.reserve(next.size());
            for (const auto& [prefix, hyp] : next) {
                ranked.emplace_back(&prefix, hyp.score(lm_weight, length_bonus, prefix.size()));
            }
            // stable sort keeps the map's lexicographic order among ties
            std::stable_sort(ranked.begin(), ranked.end(),
                             [](const auto& x, const auto& y) { return x.second > y.second; });
            std::map<LabelSeq, BeamHyp> pruned;
            for (std::size_t i = 0; i < static_cast<std::size_t>(width); ++i) {
                pruned.emplace(*ranked[i].first, next.at(*ranked[i].first));
            }
            next.swap(pruned);
        }
        beam.swap(next);
    }

    const LabelSeq* best = nullptr;
    double best_score = kNegInf;
    for (const auto& [prefix, hyp] : beam) {
        const double s = hyp.score(lm_weight, length_bonus, prefix.size());
        if (best == nullptr || s > best_score) {
            best = &prefix;
            best_score = s;
        }
    }
    return best ? *best : LabelSeq{};
}

}  // namespace asr
