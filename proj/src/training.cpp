#include "asr/training.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numeric>

#include "asr/ctc.hpp"
#include "asr/errors.hpp"

namespace asr {

namespace {

double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

bool ctc_feasible(const ModelConfig& cfg, const TrainUtterance& utt) {
    const std::int64_t t_in = utt.features->shape[0];
    if (t_in < cfg.conv.kernel_width) return false;
    const std::int64_t t_out = (t_in - cfg.conv.kernel_width) / cfg.conv.stride + 1;
    return !utt.labels.empty() && t_out >= ctc_min_frames(utt.labels);
}

}  // namespace

std::optional<std::array<double, 3>> current_alphas(const ModelConfig& cfg,
                                                    const ModelParams& params) {
    const auto* lam = std::get_if<LearnableAttention>(&cfg.attention);
    if (!lam || !params.has("atten.R")) return std::nullopt;
    const auto& r = params.at("atten.R");
    std::array<double, 3> score{0.0, 0.0, 0.0};
    std::int64_t off = 0;
    for (int n = 0; n < 3; ++n) {
        for (int j = 0; j < lam->columns[static_cast<std::size_t>(n)]; ++j) {
            score[static_cast<std::size_t>(n)] += r->data[static_cast<std::size_t>(off++)];
        }
    }
    double m = -HUGE_VAL;
    for (int n = 0; n < 3; ++n) {
        if (lam->columns[static_cast<std::size_t>(n)] > 0) {
            m = std::max(m, score[static_cast<std::size_t>(n)]);
        }
    }
    std::array<double, 3> alphas{0.0, 0.0, 0.0};
    double z = 0.0;
    for (int n = 0; n < 3; ++n) {
        if (lam->columns[static_cast<std::size_t>(n)] > 0) {
            alphas[static_cast<std::size_t>(n)] = std::exp(score[static_cast<std::size_t>(n)] - m);
            z += alphas[static_cast<std::size_t>(n)];
        }
    }
    for (auto& a : alphas) a /= z;
    return alphas;
}

TrainHistory train_epochs(ModelParams& params, const ModelConfig& cfg,
                          const std::vector<TrainUtterance>& data, const TrainOptions& options,
                          const FreezeMask& mask) {
    cfg.validate();
    if (options.epochs < 0) throw ConfigError("train: negative epoch count");
    if (data.empty()) throw ConfigError("train: empty manifest");

    TrainHistory history;
    if (options.epochs == 0) return history;

    Optimizer optimizer(options.opt, params, mask);
    Rng shuffle_rng = Rng(options.seed).fork(0x7261696e);

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        const double start = now_seconds();
        shuffle_rng.shuffle(order);

        double loss_sum = 0.0;
        int processed = 0;
        int skipped = 0;
        for (std::size_t idx : order) {
            const TrainUtterance& utt = data[idx];
            if (!ctc_feasible(cfg, utt)) {
                ++skipped;
                continue;
            }
            for (auto& [_, t] : params.values) t->zero_grad();
            Graph g;
            auto fwd = model_forward(g, utt.features, cfg, params);
            auto loss = ctc_loss(g, fwd.log_probs, utt.labels);
            const double loss_value = loss->data[0];
            if (!std::isfinite(loss_value)) {
                throw TrainAbortError("non-finite loss on utterance " + utt.utt_id + " (epoch " +
                                      std::to_string(epoch) + ")");
            }
            g.backward(loss);
            optimizer.step(params);
            loss_sum += loss_value;
            ++processed;
        }
        if (processed == 0) {
            throw TrainAbortError("all " + std::to_string(data.size()) +
                                  " utterances are CTC-infeasible");
        }

        EpochStats stats;
        stats.mean_loss = loss_sum / processed;
        stats.skipped_infeasible = skipped;
        stats.alphas = current_alphas(cfg, params);
        stats.wall_clock_s = now_seconds() - start;
        history.push_back(stats);
        if (options.verbose) {
            std::fprintf(stderr, "epoch %d: mean loss %.4f (%d utts, %d skipped)\n", epoch + 1,
                         stats.mean_loss, processed, skipped);
        }
    }
    return history;
}

ModelParams wtl_init(const Checkpoint& base, const ModelConfig& target, std::uint64_t seed) {
    target.validate();
    Rng rng(seed);
    ModelParams fresh = init_params(target, rng);

    ModelParams params;
    for (const auto& [path, shape] : param_shapes(target)) {
        auto it = base.tensors.find(path);
        if (it != base.tensors.end()) {
            if (it->second->shape != shape) {
                throw IncompatibleCheckpointError(
                    "wtl_init: shape mismatch on shared parameter " + path);
            }
            params.values.emplace(path, Tensor::from(shape, it->second->data, true));
        } else {
            params.values.emplace(path, fresh.values.at(path));
        }
    }
    return params;
}

std::pair<ModelParams, TrainHistory> two_phase_adapt(const Checkpoint& base,
                                                     const ModelConfig& target,
                                                     const std::vector<TrainUtterance>& data,
                                                     const TwoPhaseSchedule& schedule,
                                                     const TrainOptions& options) {
    const bool has_atten_params = std::holds_alternative<LearnableAttention>(target.attention) ||
                                  std::holds_alternative<ConditionalAttention>(target.attention);
    if (!has_atten_params) {
        throw ContractError("two_phase_adapt: the attention layer has no trainable parameters");
    }

    ModelParams params = wtl_init(base, target, options.seed);

    FreezeMask freeze_non_atten;
    FreezeMask freeze_atten;
    for (const auto& [path, _] : params.values) {
        if (path.starts_with("atten.")) {
            freeze_atten.insert(path);
        } else {
            freeze_non_atten.insert(path);
        }
    }

    Rng seeds(options.seed);
    TrainOptions phase1 = options;
    phase1.epochs = schedule.phase1_epochs;
    phase1.seed = seeds.fork(1).next_u64();
    TrainHistory history = train_epochs(params, target, data, phase1, freeze_non_atten);

    TrainOptions phase2 = options;
    phase2.epochs = schedule.phase2_epochs;
    phase2.seed = seeds.fork(2).next_u64();
    FreezeMask phase2_mask;
    if (schedule.phase2 == TwoPhaseSchedule::Phase2::Reversed) phase2_mask = freeze_atten;
    TrainHistory tail = train_epochs(params, target, data, phase2, phase2_mask);
    history.insert(history.end(), tail.begin(), tail.end());

    return {std::move(params), std::move(history)};
}

std::uint32_t loss_history_digest(const TrainHistory& history) {
    std::vector<unsigned char> bytes;
    bytes.reserve(history.size() * sizeof(double));
    for (const auto& e : history) {
        unsigned char buf[sizeof(double)];
        std::memcpy(buf, &e.mean_loss, sizeof(double));
        bytes.insert(bytes.end(), buf, buf + sizeof(double));
    }
    return crc32({bytes.data(), bytes.size()});
}

}  // namespace asr
