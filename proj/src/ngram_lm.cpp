#include "asr/ngram_lm.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "asr/errors.hpp"
#include "asr/format.hpp"

namespace asr {

NgramLm NgramLm::train(const std::vector<std::string>& texts, int order, double k,
                       const std::string& symbols) {
    if (texts.empty()) throw ConfigError("ngram: empty training corpus");
    if (order < 1 || order > 4) throw ConfigError("ngram: order must be in 1..4");
    if (!(k > 0.0)) throw ConfigError("ngram: smoothing k must be positive");
    if (symbols.find(kBoundary) != std::string::npos) {
        throw ConfigError("ngram: alphabet may not contain the boundary symbol");
    }

    NgramLm lm;
    lm.order_ = order;
    lm.k_ = k;
    lm.symbols_ = symbols;
    lm.uniform_logprob_ = -std::log(static_cast<double>(lm.vocab_size()));

    // Character emissions only; the end-of-sequence event keeps its add-k
    // mass, so each context row still sums to 1.
    std::map<std::string, std::map<char, std::int64_t>> counts;
    const std::string pad(static_cast<std::size_t>(order - 1), kBoundary);
    for (const auto& text : texts) {
        for (char c : text) {
            if (symbols.find(c) == std::string::npos) {
                throw ConfigError(std::string("ngram: character '") + c + "' outside the alphabet");
            }
        }
        const std::string padded = pad + text;
        for (std::size_t i = 0; i < text.size(); ++i) {
            counts[padded.substr(i, static_cast<std::size_t>(order - 1))][text[i]] += 1;
        }
    }

    const double v = static_cast<double>(lm.vocab_size());
    for (const auto& [ctx, row] : counts) {
        std::int64_t total = 0;
        for (const auto& [_, n] : row) total += n;
        const double denom = static_cast<double>(total) + k * v;
        auto& probs = lm.table_[ctx];
        for (char c : symbols) {
            const auto it = row.find(c);
            const double n = it == row.end() ? 0.0 : static_cast<double>(it->second);
            probs[c] = std::log((n + k) / denom);
        }
        probs[kBoundary] = std::log(k / denom);
    }
    return lm;
}

std::string NgramLm::context_key(const std::string& context) const {
    const std::size_t n = static_cast<std::size_t>(order_ - 1);
    if (context.size() >= n) return context.substr(context.size() - n);
    return std::string(n - context.size(), kBoundary) + context;
}

double NgramLm::cond_logprob(const std::string& context, char c) const {
    if (c != kBoundary && symbols_.find(c) == std::string::npos) {
        throw ConfigError(std::string("ngram: character '") + c + "' outside the vocabulary");
    }
    const auto it = table_.find(context_key(context));
    if (it == table_.end()) return uniform_logprob_;
    return it->second.at(c);
}

double NgramLm::sequence_logprob(const std::string& text) const {
    double total = 0.0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        total += cond_logprob(text.substr(0, i), text[i]);
    }
    return total + cond_logprob(text, kBoundary);
}

void NgramLm::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("ngram: cannot write " + path);
    out << "ngramlm\t" << order_ << "\t" << fmt_double(k_) << "\t" << symbols_ << "\n";
    for (const auto& [ctx, row] : table_) {
        for (const auto& [c, logp] : row) {
            out << ctx << "\t" << c << "\t" << fmt_double(logp) << "\n";
        }
    }
    if (!out) throw IoError("ngram: write failed for " + path);
}

NgramLm NgramLm::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("ngram: cannot read " + path);
    std::string line;
    if (!std::getline(in, line)) throw IoError("ngram: empty file " + path);

    auto split_tabs = [](const std::string& s) {
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const auto tab = s.find('\t', start);
            if (tab == std::string::npos) {
                fields.push_back(s.substr(start));
                break;
            }
            fields.push_back(s.substr(start, tab - start));
            start = tab + 1;
        }
        return fields;
    };

    auto header = split_tabs(line);
    if (header.size() != 4 || header[0] != "ngramlm") {
        throw IoError("ngram: bad header in " + path);
    }
    NgramLm lm;
    lm.order_ = std::stoi(header[1]);
    lm.k_ = parse_double(header[2]);
    lm.symbols_ = header[3];
    lm.uniform_logprob_ = -std::log(static_cast<double>(lm.vocab_size()));

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split_tabs(line);
        if (fields.size() != 3 || fields[1].size() != 1) {
            throw IoError("ngram: bad record in " + path + ": '" + line + "'");
        }
        lm.table_[fields[0]][fields[1][0]] = parse_double(fields[2]);
    }
    return lm;
}

}  // namespace asr
