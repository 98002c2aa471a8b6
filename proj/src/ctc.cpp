#include "asr/ctc.hpp"

#include <cmath>
#include <limits>
#include <string>

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

void check_labels(const LabelSeq& labels, std::int64_t alphabet) {
    if (labels.empty()) throw ContractError("ctc: empty label sequence");
    for (int l : labels) {
        if (l < 1 || l >= alphabet) {
            throw ContractError("ctc: label index " + std::to_string(l) + " outside [1, " +
                                std::to_string(alphabet - 1) + "]");
        }
    }
}

}  // namespace

std::int64_t ctc_min_frames(const LabelSeq& labels) {
    std::int64_t repeats = 0;
    for (std::size_t i = 1; i < labels.size(); ++i) {
        if (labels[i] == labels[i - 1]) ++repeats;
    }
    return static_cast<std::int64_t>(labels.size()) + repeats;
}

LabelSeq collapse_path(const std::vector<int>& path) {
    LabelSeq out;
    int prev = -1;
    for (int p : path) {
        if (p != prev && p != 0) out.push_back(p);
        prev = p;
    }
    return out;
}

TensorPtr ctc_loss(Graph& g, const TensorPtr& log_probs, const LabelSeq& labels) {
    if (log_probs->ndim() != 2) throw ShapeError("ctc: log_probs must be T x |A|");
    const std::int64_t t_len = log_probs->shape[0];
    const std::int64_t a = log_probs->shape[1];
    check_labels(labels, a);
    if (t_len < ctc_min_frames(labels)) {
        throw CtcInfeasibleError("ctc: " + std::to_string(t_len) + " frames cannot align " +
                                 std::to_string(labels.size()) + " labels (need " +
                                 std::to_string(ctc_min_frames(labels)) + ")");
    }

    // Blank-interleaved label sequence: even states blank, odd states labels.
    const std::int64_t s_len = 2 * static_cast<std::int64_t>(labels.size()) + 1;
    std::vector<int> ext(static_cast<std::size_t>(s_len), 0);
    for (std::size_t i = 0; i < labels.size(); ++i) ext[2 * i + 1] = labels[i];

    auto lp = [&](std::int64_t t, int k) {
        return log_probs->data[static_cast<std::size_t>(t * a + k)];
    };

    std::vector<double> alpha(static_cast<std::size_t>(t_len * s_len), kNegInf);
    alpha[0] = lp(0, 0);
    if (s_len > 1) alpha[1] = lp(0, ext[1]);
    for (std::int64_t t = 1; t < t_len; ++t) {
        const double* prev = alpha.data() + (t - 1) * s_len;
        double* cur = alpha.data() + t * s_len;
        for (std::int64_t s = 0; s < s_len; ++s) {
            double acc = prev[s];
            if (s >= 1) acc = logaddexp(acc, prev[s - 1]);
            if (s >= 2 && ext[static_cast<std::size_t>(s)] != 0 &&
                ext[static_cast<std::size_t>(s)] != ext[static_cast<std::size_t>(s - 2)]) {
                acc = logaddexp(acc, prev[s - 2]);
            }
            cur[s] = acc == kNegInf ? kNegInf : acc + lp(t, ext[static_cast<std::size_t>(s)]);
        }
    }

    double log_total = alpha[static_cast<std::size_t>((t_len - 1) * s_len + s_len - 1)];
    if (s_len > 1) {
        log_total =
            logaddexp(log_total, alpha[static_cast<std::size_t>((t_len - 1) * s_len + s_len - 2)]);
    }
    if (log_total == kNegInf) {
        throw CtcInfeasibleError("ctc: no feasible alignment carries probability mass");
    }

    auto out = Tensor::from({1}, {-log_total});
    return g.append("ctc_loss", {log_probs}, out,
                    [log_probs, out, labels, ext, alpha = std::move(alpha), t_len, s_len, a,
                     log_total] {
                        if (!log_probs->requires_grad) return;
                        log_probs->ensure_grad();

                        auto lp = [&](std::int64_t t, int k) {
                            return log_probs->data[static_cast<std::size_t>(t * a + k)];
                        };

                        // beta[t][s]: completion probability from state s, emission at t excluded,
                        // so alpha+beta is the mass of all paths through (t, s).
                        std::vector<double> beta(static_cast<std::size_t>(t_len * s_len), kNegInf);
                        beta[static_cast<std::size_t>((t_len - 1) * s_len + s_len - 1)] = 0.0;
                        if (s_len > 1) {
                            beta[static_cast<std::size_t>((t_len - 1) * s_len + s_len - 2)] = 0.0;
                        }
                        for (std::int64_t t = t_len - 2; t >= 0; --t) {
                            const double* nxt = beta.data() + (t + 1) * s_len;
                            double* cur = beta.data() + t * s_len;
                            for (std::int64_t s = 0; s < s_len; ++s) {
                                double acc = nxt[s] + lp(t + 1, ext[static_cast<std::size_t>(s)]);
                                if (s + 1 < s_len) {
                                    acc = logaddexp(acc, nxt[s + 1] + lp(t + 1, ext[static_cast<std::size_t>(s + 1)]));
                                }
                                if (s + 2 < s_len && ext[static_cast<std::size_t>(s + 2)] != 0 &&
                                    ext[static_cast<std::size_t>(s + 2)] != ext[static_cast<std::size_t>(s)]) {
                                    acc = logaddexp(acc, nxt[s + 2] + lp(t + 1, ext[static_cast<std::size_t>(s + 2)]));
                                }
                                cur[s] = acc;
                            }
                        }

                        const double upstream = out->grad[0];
                        std::vector<double> gamma(static_cast<std::size_t>(a));
                        for (std::int64_t t = 0; t < t_len; ++t) {
                            std::fill(gamma.begin(), gamma.end(), kNegInf);
                            for (std::int64_t s = 0; s < s_len; ++s) {
                                const double occ = alpha[static_cast<std::size_t>(t * s_len + s)] +
                                                   beta[static_cast<std::size_t>(t * s_len + s)];
                                if (occ == kNegInf) continue;
                                auto& slot = gamma[static_cast<std::size_t>(ext[static_cast<std::size_t>(s)])];
                                slot = logaddexp(slot, occ);
                            }
                            for (std::int64_t k = 0; k < a; ++k) {
                                if (gamma[static_cast<std::size_t>(k)] == kNegInf) continue;
                                log_probs->grad[static_cast<std::size_t>(t * a + k)] -=
                                    upstream * std::exp(gamma[static_cast<std::size_t>(k)] - log_total);
                            }
                        }
                    });
}

double ctc_loss_bruteforce(const Tensor& log_probs, const LabelSeq& labels) {
    if (log_probs.ndim() != 2) throw ShapeError("ctc oracle: log_probs must be T x |A|");
    const std::int64_t t_len = log_probs.shape[0];
    const std::int64_t a = log_probs.shape[1];
    if (t_len > 8 || a > 5) {
        throw OracleRefusedError("ctc oracle: refusing |A|^T enumeration beyond T=8, |A|=5");
    }
    check_labels(labels, a);

    std::vector<int> path(static_cast<std::size_t>(t_len), 0);
    double total = kNegInf;
    while (true) {
        if (collapse_path(path) == labels) {
            double lp = 0.0;
            for (std::int64_t t = 0; t < t_len; ++t) {
                lp += log_probs.data[static_cast<std::size_t>(t * a + path[static_cast<std::size_t>(t)])];
            }
            total = logaddexp(total, lp);
        }
        // Odometer increment over the |A|^T path space.
        std::int64_t pos = t_len - 1;
        while (pos >= 0) {
            if (++path[static_cast<std::size_t>(pos)] < a) break;
            path[static_cast<std::size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) break;
    }
    return total == kNegInf ? std::numeric_limits<double>::infinity() : -total;
}

}  // namespace asr
