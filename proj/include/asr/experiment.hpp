#pragma once

#include <memory>
#include <optional>

#include "asr/corpus.hpp"
#include "asr/decoder.hpp"
#include "asr/report.hpp"
#include "asr/training.hpp"

namespace asr {

/// Paper-reported reference points (private test set; drawn on plots only).
inline constexpr double kReferenceBaseWerPct = 39.42;
inline constexpr double kReferencePtmWerPct = 26.8;
inline constexpr double kReferenceBestMamWerPct = 25.22;  // 26.8 - 1.58 absolute

struct DecoderSettings {
    int beam_width = 16;
    double lm_weight = 0.5;
    double length_bonus = 0.5;
};

enum class Condition { BaseEval, Ptm, Mam, Lam, Conditional };

std::string condition_name(Condition c);

struct ExperimentSpec {
    Condition condition = Condition::BaseEval;
    AttentionSpec attention = IdentityAttention{};  // consulted for mam/lam/conditional
    std::vector<std::uint64_t> seeds{1};
    int epochs = 40;
    TwoPhaseSchedule schedule{};
    std::string corpus_dir;
    std::string base_ckpt_path;
    std::string lm_path;       // empty -> decode without LM fusion
    std::string split = "test";
    std::string domain = "target";
    DecoderSettings decoder;
    OptimizerOptions opt{OptKind::Adam, 1e-5};
    bool record_timing = true;
};

struct SplitEval {
    double wer = 0.0;
    std::int64_t sub = 0;
    std::int64_t del = 0;
    std::int64_t ins = 0;
    std::int64_t ref_words = 0;
};

SplitEval evaluate_utterances(const ModelConfig& cfg, const ModelParams& params,
                              const std::vector<TrainUtterance>& utterances, const NgramLm* lm,
                              const DecoderSettings& decoder);

/// Shared corpus/base/LM cache so sweeps do not reload per row.
class ExperimentContext {
public:
    explicit ExperimentContext(const ExperimentSpec& spec);

    const Checkpoint& base() const;
    const NgramLm* lm() const;  // null when no LM configured
    const std::vector<TrainUtterance>& train_set() const;
    const std::vector<TrainUtterance>& eval_set() const;

private:
    std::unique_ptr<Checkpoint> base_;
    std::unique_ptr<NgramLm> lm_;
    std::vector<TrainUtterance> train_;
    std::vector<TrainUtterance> eval_;
};

struct ExperimentRun {
    WerRow row;
    std::optional<std::array<double, 3>> final_alphas;  // LAM runs
};

/// One (condition, seed) run against a prepared context.
ExperimentRun run_condition(const ExperimentSpec& spec, const ExperimentContext& ctx,
                            std::uint64_t seed);

/// Executes the condition for every seed in the spec.
WerReport run_experiment(const ExperimentSpec& spec);

/// All 28 (a1,a2,a3) sixth-triples summing to one.
std::vector<ManualAttention> full_mam_grid();

/// One run per manual setting at spec.seeds[0]; rows sorted by (wer, setting).
WerReport sweep_mam(const ExperimentSpec& spec, const std::vector<ManualAttention>& grid);

inline const std::vector<std::array<int, 3>> kLamSweepSettings = {
    {1, 1, 1}, {4, 1, 1}, {3, 2, 1}, {5, 4, 0}};

struct LamSweepResult {
    WerReport report;
    std::vector<LamSettingSummary> summary;
};

/// seeds_per_setting runs per LAM setting with distinct derived seeds.
LamSweepResult sweep_lam(const ExperimentSpec& spec,
                         const std::vector<std::array<int, 3>>& settings, int seeds_per_setting);

}  // namespace asr
