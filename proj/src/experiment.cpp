#include "asr/experiment.hpp"

#include <algorithm>
#include <chrono>

#include "asr/errors.hpp"
#include "asr/wer.hpp"

namespace asr {

namespace {

double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

ModelConfig config_with_attention(const ModelConfig& base, const AttentionSpec& attention) {
    ModelConfig cfg = base;
    cfg.attention = attention;
    cfg.validate();
    return cfg;
}

}  // namespace

std::string condition_name(Condition c) {
    switch (c) {
        case Condition::BaseEval: return "base_eval";
        case Condition::Ptm: return "ptm";
        case Condition::Mam: return "mam";
        case Condition::Lam: return "lam";
        case Condition::Conditional: return "conditional";
    }
    return "?";
}

SplitEval evaluate_utterances(const ModelConfig& cfg, const ModelParams& params,
                              const std::vector<TrainUtterance>& utterances, const NgramLm* lm,
                              const DecoderSettings& decoder) {
    if (utterances.empty()) throw ConfigError("evaluate: empty split");
    SplitEval eval;
    for (const auto& utt : utterances) {
        Graph g;
        auto fwd = model_forward(g, utt.features, cfg, params);
        const LabelSeq hyp = beam_search_decode(*fwd.log_probs, decoder.beam_width, lm,
                                                decoder.lm_weight, decoder.length_bonus,
                                                cfg.symbols);
        const auto ref_words = tokenize_words(utt.transcript);
        const auto hyp_words = tokenize_words(labels_to_text(hyp, cfg.symbols));
        const EditOps ops = edit_distance(ref_words, hyp_words);
        eval.sub += ops.substitutions;
        eval.del += ops.deletions;
        eval.ins += ops.insertions;
        eval.ref_words += static_cast<std::int64_t>(ref_words.size());
    }
    eval.wer = pooled_wer(eval.sub + eval.del + eval.ins, eval.ref_words);
    return eval;
}

ExperimentContext::ExperimentContext(const ExperimentSpec& spec) {
    base_ = std::make_unique<Checkpoint>(load_checkpoint(spec.base_ckpt_path));
    if (!spec.lm_path.empty()) {
        lm_ = std::make_unique<NgramLm>(NgramLm::load(spec.lm_path));
    }
    const std::string symbols = base_->config.symbols;
    if (spec.condition != Condition::BaseEval) {
        train_ = load_utterances(
            load_manifest(manifest_path(spec.corpus_dir, spec.domain, "train")), spec.corpus_dir,
            symbols);
    }
    eval_ = load_utterances(load_manifest(manifest_path(spec.corpus_dir, spec.domain, spec.split)),
                            spec.corpus_dir, symbols);
}

const Checkpoint& ExperimentContext::base() const { return *base_; }
const NgramLm* ExperimentContext::lm() const { return lm_.get(); }
const std::vector<TrainUtterance>& ExperimentContext::train_set() const { return train_; }
const std::vector<TrainUtterance>& ExperimentContext::eval_set() const { return eval_; }

ExperimentRun run_condition(const ExperimentSpec& spec, const ExperimentContext& ctx,
                            std::uint64_t seed) {
    const double start = now_seconds();
    const Checkpoint& base = ctx.base();

    ModelConfig cfg = base.config;
    ModelParams params;
    std::optional<std::array<double, 3>> alphas;

    switch (spec.condition) {
        case Condition::BaseEval:
            params = params_from_checkpoint(base);
            break;
        case Condition::Ptm: {
            cfg = config_with_attention(base.config, IdentityAttention{});
            params = wtl_init(base, cfg, seed);
            TrainOptions opt;
            opt.opt = spec.opt;
            opt.epochs = spec.epochs;
            opt.seed = seed;
            train_epochs(params, cfg, ctx.train_set(), opt);
            break;
        }
        case Condition::Mam: {
            cfg = config_with_attention(base.config, spec.attention);
            if (!std::holds_alternative<ManualAttention>(cfg.attention)) {
                throw ConfigError("mam condition needs a manual attention spec");
            }
            params = wtl_init(base, cfg, seed);
            TrainOptions opt;
            opt.opt = spec.opt;
            opt.epochs = spec.epochs;
            opt.seed = seed;
            train_epochs(params, cfg, ctx.train_set(), opt);
            break;
        }
        case Condition::Lam:
        case Condition::Conditional: {
            cfg = config_with_attention(base.config, spec.attention);
            const bool is_lam = std::holds_alternative<LearnableAttention>(cfg.attention);
            const bool is_cond = std::holds_alternative<ConditionalAttention>(cfg.attention);
            if (spec.condition == Condition::Lam ? !is_lam : !is_cond) {
                throw ConfigError("condition does not match the attention spec");
            }
            TrainOptions opt;
            opt.opt = spec.opt;
            opt.seed = seed;
            TwoPhaseSchedule schedule = spec.schedule;
            schedule.phase2_epochs = spec.epochs;
            auto [adapted, history] = two_phase_adapt(base, cfg, ctx.train_set(), schedule, opt);
            params = std::move(adapted);
            (void)history;
            break;
        }
    }
    alphas = current_alphas(cfg, params);

    const SplitEval eval =
        evaluate_utterances(cfg, params, ctx.eval_set(), ctx.lm(), spec.decoder);

    ExperimentRun run;
    run.row.condition = condition_name(spec.condition);
    run.row.setting = spec.condition == Condition::BaseEval || spec.condition == Condition::Ptm
                          ? "-"
                          : attention_label(cfg.attention);
    run.row.seed = seed;
    run.row.split = spec.split;
    run.row.wer = eval.wer;
    run.row.sub = eval.sub;
    run.row.del = eval.del;
    run.row.ins = eval.ins;
    run.row.ref_words = eval.ref_words;
    run.row.wall_clock_s = spec.record_timing ? now_seconds() - start : 0.0;
    run.final_alphas = alphas;
    return run;
}

WerReport run_experiment(const ExperimentSpec& spec) {
    ExperimentContext ctx(spec);
    WerReport report;
    for (std::uint64_t seed : spec.seeds) {
        report.rows.push_back(run_condition(spec, ctx, seed).row);
    }
    return report;
}

std::vector<ManualAttention> full_mam_grid() {
    std::vector<ManualAttention> grid;
    for (int a = 6; a >= 0; --a) {
        for (int b = 6 - a; b >= 0; --b) {
            grid.push_back(ManualAttention{{a, b, 6 - a - b}});
        }
    }
    return grid;
}

WerReport sweep_mam(const ExperimentSpec& spec, const std::vector<ManualAttention>& grid) {
    if (grid.empty()) throw ConfigError("sweep_mam: empty grid");
    ExperimentSpec mam_spec = spec;
    mam_spec.condition = Condition::Mam;
    ExperimentContext ctx(mam_spec);

    WerReport report;
    const std::uint64_t seed = spec.seeds.empty() ? 1 : spec.seeds[0];
    for (const auto& setting : grid) {
        mam_spec.attention = setting;
        report.rows.push_back(run_condition(mam_spec, ctx, seed).row);
    }
    std::stable_sort(report.rows.begin(), report.rows.end(), [](const WerRow& a, const WerRow& b) {
        return a.wer != b.wer ? a.wer < b.wer : a.setting < b.setting;
    });
    return report;
}

LamSweepResult sweep_lam(const ExperimentSpec& spec,
                         const std::vector<std::array<int, 3>>& settings, int seeds_per_setting) {
    if (settings.empty() || seeds_per_setting < 1) throw ConfigError("sweep_lam: bad arguments");
    ExperimentSpec lam_spec = spec;
    lam_spec.condition = Condition::Lam;
    ExperimentContext ctx(lam_spec);

    const std::uint64_t base_seed = spec.seeds.empty() ? 1 : spec.seeds[0];
    Rng seed_stream(base_seed);

    LamSweepResult result;
    std::map<std::string, std::vector<std::array<double, 3>>> alphas_by_setting;
    std::vector<std::string> setting_order;
    for (const auto& columns : settings) {
        lam_spec.attention = LearnableAttention{columns};
        const std::string label = attention_label(lam_spec.attention);
        setting_order.push_back(label);
        for (int k = 0; k < seeds_per_setting; ++k) {
            const std::uint64_t seed = seed_stream.next_u64() | 1u;  // distinct per run
            auto run = run_condition(lam_spec, ctx, seed);
            if (run.final_alphas) alphas_by_setting[label].push_back(*run.final_alphas);
            result.report.rows.push_back(std::move(run.row));
        }
    }
    result.summary = summarize_lam_sweep(result.report, setting_order);
    for (auto& s : result.summary) s.final_alphas = alphas_by_setting[s.setting];
    return result;
}

}  // namespace asr
