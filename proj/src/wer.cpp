#include "asr/wer.hpp"

#include <cctype>

#include "asr/errors.hpp"

namespace asr {

std::vector<std::string> tokenize_words(const std::string& text) {
    std::vector<std::string> words;
    std::string word;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!word.empty()) {
                words.push_back(std::move(word));
                word.clear();
            }
        } else {
            word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    if (!word.empty()) words.push_back(std::move(word));
    return words;
}

EditOps edit_distance(const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
    const std::size_t r = ref.size();
    const std::size_t h = hyp.size();

    // DP over (cost, -diagonal steps); diagonal count then determines the
    // op decomposition: D = |ref| - diag, I = |hyp| - diag, S = cost - D - I.
    struct Cell {
        std::int64_t cost;
        std::int64_t diag;
    };
    auto better = [](const Cell& a, const Cell& b) {
        return a.cost < b.cost || (a.cost == b.cost && a.diag > b.diag);
    };

    std::vector<Cell> prev(h + 1), cur(h + 1);
    for (std::size_t j = 0; j <= h; ++j) prev[j] = {static_cast<std::int64_t>(j), 0};
    for (std::size_t i = 1; i <= r; ++i) {
        cur[0] = {static_cast<std::int64_t>(i), 0};
        for (std::size_t j = 1; j <= h; ++j) {
            const std::int64_t sub_cost = ref[i - 1] == hyp[j - 1] ? 0 : 1;
            Cell best{prev[j - 1].cost + sub_cost, prev[j - 1].diag + 1};
            const Cell del{prev[j].cost + 1, prev[j].diag};
            const Cell ins{cur[j - 1].cost + 1, cur[j - 1].diag};
            if (better(del, best)) best = del;
            if (better(ins, best)) best = ins;
            cur[j] = best;
        }
        prev.swap(cur);
    }

    const Cell final = prev[h];
    EditOps ops;
    ops.deletions = static_cast<std::int64_t>(r) - final.diag;
    ops.insertions = static_cast<std::int64_t>(h) - final.diag;
    ops.substitutions = final.cost - ops.deletions - ops.insertions;
    return ops;
}

double pooled_wer(std::int64_t total_errors, std::int64_t total_ref_words) {
    if (total_ref_words <= 0) throw ContractError("wer: empty reference corpus");
    return static_cast<double>(total_errors) / static_cast<double>(total_ref_words);
}

}  // namespace asr
