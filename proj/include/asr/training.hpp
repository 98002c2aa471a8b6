#pragma once

#include <array>
#include <optional>
#include <utility>

#include "asr/checkpoint.hpp"
#include "asr/optimizer.hpp"

namespace asr {

/// Feature matrix + target labels, ready for CTC training.
struct TrainUtterance {
    std::string utt_id;
    TensorPtr features;  // T x feature_dim
    LabelSeq labels;
    std::string transcript;
};

struct EpochStats {
    double mean_loss = 0.0;
    double val_wer = -1.0;  // -1 when no validation decode was run this epoch
    double wall_clock_s = 0.0;
    std::optional<std::array<double, 3>> alphas;  // LAM attention snapshot
    int skipped_infeasible = 0;
};

using TrainHistory = std::vector<EpochStats>;

struct TrainOptions {
    OptimizerOptions opt;
    int epochs = 40;
    std::uint64_t seed = 0;
    bool verbose = false;
};

/// Per-utterance CTC training (batch size 1): seeded shuffle each epoch,
/// forward, loss, backward, optimizer step. Infeasible utterances are skipped
/// and counted; an epoch where everything was infeasible aborts.
TrainHistory train_epochs(ModelParams& params, const ModelConfig& cfg,
                          const std::vector<TrainUtterance>& data, const TrainOptions& options,
                          const FreezeMask& mask = {});

/// Weight-transfer initialization: shared parameters copied from the base
/// checkpoint, target-only attention parameters freshly seeded. Shape
/// disagreement on a shared path raises IncompatibleCheckpointError.
ModelParams wtl_init(const Checkpoint& base, const ModelConfig& target, std::uint64_t seed);

struct TwoPhaseSchedule {
    int phase1_epochs = 5;   // attention-only warmup, everything else frozen
    int phase2_epochs = 40;
    enum class Phase2 { All, Reversed } phase2 = Phase2::All;
};

/// Warm up the attention parameters with everything else frozen, then either
/// train everything (All) or freeze the attention and train the rest
/// (Reversed, the literal reading of the schedule). Returns the adapted
/// params and the concatenated history.
std::pair<ModelParams, TrainHistory> two_phase_adapt(const Checkpoint& base,
                                                     const ModelConfig& target,
                                                     const std::vector<TrainUtterance>& data,
                                                     const TwoPhaseSchedule& schedule,
                                                     const TrainOptions& options);

/// LAM attention weights implied by the current atten.R (masked softmax of
/// partition sums); empty when the config has no learnable attention.
std::optional<std::array<double, 3>> current_alphas(const ModelConfig& cfg,
                                                    const ModelParams& params);

std::uint32_t loss_history_digest(const TrainHistory& history);

}  // namespace asr
