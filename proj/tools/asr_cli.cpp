#include <array>
#include <chrono>
#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "asr/errors.hpp"
#include "asr/experiment.hpp"
#include "asr/svg_plot.hpp"

namespace {

using namespace asr;

std::array<int, 3> parse_sixths(const std::string& text) {
    // Accepts "4/6,2/6,0/6" and "4,2,0".
    std::array<int, 3> sixths{};
    std::size_t pos = 0;
    for (int i = 0; i < 3; ++i) {
        std::size_t next = text.find(',', pos);
        std::string tok = text.substr(pos, next == std::string::npos ? next : next - pos);
        const auto slash = tok.find('/');
        if (slash != std::string::npos) tok = tok.substr(0, slash);
        sixths[static_cast<std::size_t>(i)] = std::stoi(tok);
        if (next == std::string::npos && i < 2) {
            throw asr::ConfigError("expected three comma-separated attention weights");
        }
        pos = next + 1;
    }
    return sixths;
}

std::array<int, 3> parse_columns(const std::string& text) {
    std::array<int, 3> cols{};
    std::size_t pos = 0;
    for (int i = 0; i < 3; ++i) {
        std::size_t next = text.find(',', pos);
        cols[static_cast<std::size_t>(i)] =
            std::stoi(text.substr(pos, next == std::string::npos ? next : next - pos));
        if (next == std::string::npos && i < 2) {
            throw asr::ConfigError("expected three comma-separated column sizes");
        }
        pos = next + 1;
    }
    return cols;
}

std::vector<std::string> source_train_transcripts(const std::string& corpus_dir) {
    auto manifest = load_manifest(manifest_path(corpus_dir, "source", "train"));
    std::vector<std::string> texts;
    texts.reserve(manifest.entries.size());
    for (const auto& e : manifest.entries) texts.push_back(e.transcript);
    return texts;
}

int cmd_gen_corpus(const std::string& spec_path, const std::string& out_dir, std::uint64_t seed) {
    GenSpec spec = spec_path.empty() ? GenSpec{} : GenSpec::from_json_file(spec_path);
    gen_corpus(spec, seed, out_dir);
    for (const std::string domain : {"source", "target"}) {
        for (const std::string split : {"train", "val", "test"}) {
            auto m = load_manifest(manifest_path(out_dir, domain, split));
            std::printf("%s/%s: %zu utterances, %.1f s, %zu speakers\n", domain.c_str(),
                        split.c_str(), m.entries.size(), m.total_duration_s(),
                        m.speaker_ids().size());
        }
    }
    return 0;
}

int cmd_train_base(const std::string& corpus_dir, int epochs, double lr, const std::string& out,
                   std::uint64_t seed, std::int64_t hidden, std::string lm_out, int lm_order,
                   double lm_k, bool verbose) {
    auto manifest = load_manifest(manifest_path(corpus_dir, "source", "train"));
    if (manifest.entries.empty()) throw asr::ConfigError("source train split is empty");
    auto data = load_utterances(manifest, corpus_dir);

    ModelConfig cfg;
    cfg.feature_dim = data.front().features->shape[1];
    cfg.gru_hidden = hidden;
    cfg.attention = IdentityAttention{};
    cfg.validate();

    Rng rng(seed);
    ModelParams params = init_params(cfg, rng);

    TrainOptions options;
    options.opt.kind = OptKind::Adam;
    options.opt.lr = lr;
    options.epochs = epochs;
    options.seed = seed;
    options.verbose = verbose;
    TrainHistory history = train_epochs(params, cfg, data, options);

    CheckpointMeta meta;
    meta.epoch = epochs;
    meta.seed = seed;
    meta.loss_digest = loss_history_digest(history);
    save_checkpoint(out, cfg, params, meta);

    if (lm_out.empty()) lm_out = out + ".lm";
    NgramLm lm = NgramLm::train(source_train_transcripts(corpus_dir), lm_order, lm_k, cfg.symbols);
    lm.save(lm_out);

    std::printf("trained base: %d epochs, final mean loss %.4f\n", epochs,
                history.empty() ? 0.0 : history.back().mean_loss);
    std::printf("checkpoint: %s\nlanguage model: %s\n", out.c_str(), lm_out.c_str());
    return 0;
}

int cmd_adapt(const std::string& base_path, const std::string& corpus_dir,
              const std::string& method, const std::string& alphas_text,
              const std::string& columns_text, std::int64_t proj_dim, const std::string& phase2,
              int epochs, int warmup_epochs, double lr, std::uint64_t seed, const std::string& out,
              bool verbose) {
    Checkpoint base = load_checkpoint(base_path);
    auto data = load_utterances(load_manifest(manifest_path(corpus_dir, "target", "train")),
                                corpus_dir, base.config.symbols);

    ModelConfig cfg = base.config;
    if (method == "ptm") {
        cfg.attention = IdentityAttention{};
    } else if (method == "mam") {
        cfg.attention = ManualAttention{parse_sixths(alphas_text)};
    } else if (method == "lam") {
        cfg.attention = LearnableAttention{parse_columns(columns_text)};
    } else if (method == "cond") {
        cfg.attention = ConditionalAttention{proj_dim};
    } else {
        throw asr::ConfigError("unknown method: " + method);
    }
    cfg.validate();

    TrainOptions options;
    options.opt.kind = OptKind::Adam;
    options.opt.lr = lr;
    options.epochs = epochs;
    options.seed = seed;
    options.verbose = verbose;

    ModelParams params;
    TrainHistory history;
    if (method == "lam" || method == "cond") {
        TwoPhaseSchedule schedule;
        schedule.phase1_epochs = warmup_epochs;
        schedule.phase2_epochs = epochs;
        schedule.phase2 = phase2 == "reversed" ? TwoPhaseSchedule::Phase2::Reversed
                                               : TwoPhaseSchedule::Phase2::All;
        auto [adapted, hist] = two_phase_adapt(base, cfg, data, schedule, options);
        params = std::move(adapted);
        history = std::move(hist);
    } else {
        params = wtl_init(base, cfg, seed);
        history = train_epochs(params, cfg, data, options);
    }

    CheckpointMeta meta;
    meta.epoch = static_cast<std::int64_t>(history.size());
    meta.seed = seed;
    meta.loss_digest = loss_history_digest(history);
    save_checkpoint(out, cfg, params, meta);

    std::printf("adapted (%s, %s): %zu epochs, final mean loss %.4f\n", method.c_str(),
                attention_label(cfg.attention).c_str(), history.size(),
                history.empty() ? 0.0 : history.back().mean_loss);
    if (auto alphas = current_alphas(cfg, params)) {
        std::printf("final attention: %.4f %.4f %.4f\n", (*alphas)[0], (*alphas)[1], (*alphas)[2]);
    }
    std::printf("checkpoint: %s\n", out.c_str());
    return 0;
}

int cmd_eval(const std::string& ckpt_path, const std::string& corpus_dir, const std::string& split,
             const std::string& domain, int beam_width, const std::string& lm_path,
             double lm_weight, double length_bonus, const std::string& out, bool timing) {
    const double start =
        std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
    Checkpoint ckpt = load_checkpoint(ckpt_path);
    ModelParams params = params_from_checkpoint(ckpt);
    auto data = load_utterances(load_manifest(manifest_path(corpus_dir, domain, split)), corpus_dir,
                                ckpt.config.symbols);
    std::optional<NgramLm> lm;
    if (!lm_path.empty()) lm = NgramLm::load(lm_path);

    DecoderSettings decoder{beam_width, lm_weight, length_bonus};
    SplitEval eval =
        evaluate_utterances(ckpt.config, params, data, lm ? &*lm : nullptr, decoder);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count() -
        start;

    WerReport report;
    WerRow row;
    row.condition = "eval";
    row.setting = attention_label(ckpt.config.attention);
    row.seed = ckpt.meta.seed;
    row.split = split;
    row.wer = eval.wer;
    row.sub = eval.sub;
    row.del = eval.del;
    row.ins = eval.ins;
    row.ref_words = eval.ref_words;
    row.wall_clock_s = timing ? elapsed : 0.0;
    report.rows.push_back(row);
    write_text_file(out, report_to_csv(report));

    std::printf("%s %s/%s: WER %.4f (S=%lld D=%lld I=%lld / %lld words)\n", ckpt_path.c_str(),
                domain.c_str(), split.c_str(), eval.wer, static_cast<long long>(eval.sub),
                static_cast<long long>(eval.del), static_cast<long long>(eval.ins),
                static_cast<long long>(eval.ref_words));
    return 0;
}

ExperimentSpec sweep_spec(const std::string& base_path, const std::string& corpus_dir,
                          const std::string& lm_path, int epochs, double lr, std::uint64_t seed,
                          int beam_width, double lm_weight, double length_bonus, bool timing) {
    ExperimentSpec spec;
    spec.base_ckpt_path = base_path;
    spec.corpus_dir = corpus_dir;
    spec.lm_path = lm_path;
    spec.epochs = epochs;
    spec.opt.lr = lr;
    spec.seeds = {seed};
    spec.decoder = DecoderSettings{beam_width, lm_weight, length_bonus};
    spec.record_timing = timing;
    return spec;
}

int cmd_sweep_mam(const ExperimentSpec& spec, const std::string& grid_text,
                  const std::string& out) {
    std::vector<ManualAttention> grid;
    if (grid_text == "full") {
        grid = full_mam_grid();
    } else {
        std::size_t pos = 0;
        while (pos <= grid_text.size()) {
            const auto next = grid_text.find(';', pos);
            const std::string tok =
                grid_text.substr(pos, next == std::string::npos ? next : next - pos);
            if (!tok.empty()) grid.push_back(ManualAttention{parse_sixths(tok)});
            if (next == std::string::npos) break;
            pos = next + 1;
        }
        if (grid.empty()) throw asr::ConfigError("empty --grid list");
    }
    WerReport report = sweep_mam(spec, grid);
    write_text_file(out, report_to_csv(report));
    std::printf("mam sweep: %zu settings -> %s (best %s at WER %.4f)\n", grid.size(), out.c_str(),
                report.rows.front().setting.c_str(), report.rows.front().wer);
    return 0;
}

int cmd_sweep_lam(const ExperimentSpec& spec, int seeds_per_setting, const std::string& out) {
    LamSweepResult result = sweep_lam(spec, kLamSweepSettings, seeds_per_setting);
    write_text_file(out, lam_sweep_csv(result.report, result.summary));
    std::printf("lam sweep: %zu rows -> %s\n", result.report.rows.size(), out.c_str());
    for (const auto& s : result.summary) {
        std::printf("  %s: mean %.4f min %.4f max %.4f stddev %.4f spread %.4f\n",
                    s.setting.c_str(), s.wer_mean, s.wer_min, s.wer_max, s.wer_stddev,
                    s.wer_spread);
    }
    return 0;
}

int cmd_plot(const std::string& in, const std::string& out, std::optional<double> ref_ptm,
             std::optional<double> ref_base) {
    WerReport report = report_from_csv_file(in);
    write_text_file(out, wer_strip_svg(report, ref_base, ref_ptm));
    std::printf("plot: %zu rows -> %s\n", report.rows.size(), out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Desk-scale CTC speech recognition with attention-based layer fusion"};
    app.require_subcommand(1);

    // gen-corpus
    std::string spec_path, out_dir;
    std::uint64_t seed = 1;
    auto* gen = app.add_subcommand("gen-corpus", "Generate a synthetic domain-shifted corpus");
    gen->add_option("--spec", spec_path, "Generation spec JSON (defaults when omitted)");
    gen->add_option("--out", out_dir, "Output corpus directory")->required();
    gen->add_option("--seed", seed, "Master seed");

    // train-base
    std::string corpus_dir, ckpt_out, lm_out;
    int epochs = 15;
    double lr = 3e-4;
    std::int64_t hidden = 16;
    int lm_order = 3;
    double lm_k = 0.1;
    bool verbose = false;
    auto* train = app.add_subcommand("train-base", "Train the base model on the source domain");
    train->add_option("--corpus", corpus_dir, "Corpus directory")->required();
    train->add_option("--epochs", epochs, "Training epochs");
    train->add_option("--lr", lr, "Learning rate");
    train->add_option("--out", ckpt_out, "Output checkpoint")->required();
    train->add_option("--seed", seed, "Seed");
    train->add_option("--hidden", hidden, "GRU hidden size");
    train->add_option("--lm-out", lm_out, "LM output path (default <out>.lm)");
    train->add_option("--lm-order", lm_order, "Character n-gram order");
    train->add_option("--lm-k", lm_k, "Add-k smoothing");
    train->add_flag("--verbose", verbose, "Per-epoch loss to stderr");

    // adapt
    std::string base_path, method, alphas_text = "6/6,0/6,0/6", columns_text = "1,1,1";
    std::string phase2 = "all";
    std::int64_t proj_dim = 8;
    int warmup_epochs = 5;
    int adapt_epochs = 40;
    double adapt_lr = 1e-5;
    auto* adapt = app.add_subcommand("adapt", "Transfer-learn the base model onto the target domain");
    adapt->add_option("--base", base_path, "Base checkpoint")->required();
    adapt->add_option("--corpus", corpus_dir, "Corpus directory")->required();
    adapt->add_option("--method", method, "ptm | mam | lam | cond")->required();
    adapt->add_option("--alphas", alphas_text, "Manual attention weights, e.g. 4/6,2/6,0/6");
    adapt->add_option("--columns", columns_text, "LAM column sizes, e.g. 4,1,1");
    adapt->add_option("--proj-dim", proj_dim, "Conditional attention projection size");
    adapt->add_option("--phase2", phase2, "all | reversed (two-phase schedule)");
    adapt->add_option("--epochs", adapt_epochs, "Fine-tuning epochs");
    adapt->add_option("--warmup-epochs", warmup_epochs, "Attention-only warmup epochs");
    adapt->add_option("--lr", adapt_lr, "Learning rate");
    adapt->add_option("--seed", seed, "Seed");
    adapt->add_option("--out", ckpt_out, "Output checkpoint")->required();
    adapt->add_flag("--verbose", verbose, "Per-epoch loss to stderr");

    // eval
    std::string eval_ckpt, split = "test", domain = "target", lm_path, report_out;
    int beam_width = 16;
    double lm_weight = 0.5, length_bonus = 0.5;
    std::string timing = "wall";
    auto* eval = app.add_subcommand("eval", "Decode a split and report WER");
    eval->add_option("--ckpt", eval_ckpt, "Checkpoint")->required();
    eval->add_option("--corpus", corpus_dir, "Corpus directory")->required();
    eval->add_option("--split", split, "val | test");
    eval->add_option("--domain", domain, "source | target");
    eval->add_option("--beam-width", beam_width, "Beam width");
    eval->add_option("--lm", lm_path, "Character n-gram LM file");
    eval->add_option("--lm-weight", lm_weight, "LM fusion weight");
    eval->add_option("--length-bonus", length_bonus, "Per-character length bonus");
    eval->add_option("--out", report_out, "Report CSV")->required();
    eval->add_option("--timing", timing, "wall | none (none writes 0.000)");

    // sweep-mam
    std::string grid_text = "full";
    auto* smam = app.add_subcommand("sweep-mam", "Run the manual attention grid");
    smam->add_option("--base", base_path, "Base checkpoint")->required();
    smam->add_option("--corpus", corpus_dir, "Corpus directory")->required();
    smam->add_option("--grid", grid_text, "full or 'a,b,c;a,b,c;...' in sixths");
    smam->add_option("--out", report_out, "Output CSV")->required();
    smam->add_option("--lm", lm_path, "LM file");
    smam->add_option("--epochs", adapt_epochs, "Fine-tuning epochs per setting");
    smam->add_option("--lr", adapt_lr, "Learning rate");
    smam->add_option("--seed", seed, "Seed (fixed across the grid)");
    smam->add_option("--beam-width", beam_width, "Beam width");
    smam->add_option("--lm-weight", lm_weight, "LM fusion weight");
    smam->add_option("--length-bonus", length_bonus, "Per-character length bonus");
    smam->add_option("--timing", timing, "wall | none");

    // sweep-lam
    int seeds_per_setting = 5;
    auto* slam = app.add_subcommand("sweep-lam", "Run the learnable attention settings");
    slam->add_option("--base", base_path, "Base checkpoint")->required();
    slam->add_option("--corpus", corpus_dir, "Corpus directory")->required();
    slam->add_option("--seeds", seeds_per_setting, "Seeds per setting");
    slam->add_option("--out", report_out, "Output CSV")->required();
    slam->add_option("--lm", lm_path, "LM file");
    slam->add_option("--epochs", adapt_epochs, "Phase-2 epochs per run");
    slam->add_option("--lr", adapt_lr, "Learning rate");
    slam->add_option("--seed", seed, "Seed stream root");
    slam->add_option("--beam-width", beam_width, "Beam width");
    slam->add_option("--lm-weight", lm_weight, "LM fusion weight");
    slam->add_option("--length-bonus", length_bonus, "Per-character length bonus");
    slam->add_option("--timing", timing, "wall | none");

    // plot
    std::string plot_in, plot_out;
    double ref_ptm = -1.0, ref_base = -1.0;
    auto* plot = app.add_subcommand("plot", "Render a WER CSV as an SVG strip chart");
    plot->add_option("--in", plot_in, "Input CSV")->required();
    plot->add_option("--out", plot_out, "Output SVG")->required();
    plot->add_option("--ref-ptm", ref_ptm, "PTM reference line (percent)");
    plot->add_option("--ref-base", ref_base, "Base reference line (percent)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen_corpus(spec_path, out_dir, seed);
        if (train->parsed()) {
            return cmd_train_base(corpus_dir, epochs, lr, ckpt_out, seed, hidden, lm_out, lm_order,
                                  lm_k, verbose);
        }
        if (adapt->parsed()) {
            return cmd_adapt(base_path, corpus_dir, method, alphas_text, columns_text, proj_dim,
                             phase2, adapt_epochs, warmup_epochs, adapt_lr, seed, ckpt_out,
                             verbose);
        }
        if (eval->parsed()) {
            return cmd_eval(eval_ckpt, corpus_dir, split, domain, beam_width, lm_path, lm_weight,
                            length_bonus, report_out, timing != "none");
        }
        if (smam->parsed() || slam->parsed()) {
            ExperimentSpec spec =
                sweep_spec(base_path, corpus_dir, lm_path, adapt_epochs, adapt_lr, seed, beam_width,
                           lm_weight, length_bonus, timing != "none");
            if (smam->parsed()) return cmd_sweep_mam(spec, grid_text, report_out);
            return cmd_sweep_lam(spec, seeds_per_setting, report_out);
        }
        if (plot->parsed()) {
            return cmd_plot(plot_in, plot_out,
                            ref_ptm >= 0 ? std::optional<double>(ref_ptm) : std::nullopt,
                            ref_base >= 0 ? std::optional<double>(ref_base) : std::nullopt);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
