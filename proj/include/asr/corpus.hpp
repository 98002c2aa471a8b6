#pragma once

#include <array>
#include <string>
#include <vector>

#include "asr/rng.hpp"
#include "asr/tensor.hpp"
#include "asr/training.hpp"

namespace asr {

inline constexpr double kFrameStepSeconds = 0.02;
inline constexpr double kMaxUtteranceSeconds = 7.0;  // strict upper bound
inline constexpr double kMinUtteranceSeconds = 3.0;  // inclusive lower bound

struct SpeakerProfile {
    std::string speaker_id;
    std::string domain;  // "source" | "target"
    std::string group;   // "mci" | "healthy"
    std::string gender;  // "f" | "m"
    // Per-character feature offsets, symbols.size() x feature_dim row-major.
    std::vector<double> perturbation;
    double tempo_factor = 1.0;

    double perturbation_norm() const;
};

struct Utterance {
    std::string utt_id;
    std::string speaker_id;
    std::string transcript;
    TensorPtr features;  // T x feature_dim
    double duration_s = 0.0;
};

struct ManifestEntry {
    std::string utt_id;
    std::string speaker_id;
    std::string domain;
    std::string group;
    std::string gender;
    std::string transcript;
    std::string feature_path;  // relative to the corpus directory
    std::int64_t frames = 0;
    double duration_s = 0.0;
};

struct Manifest {
    std::string split;  // "train" | "val" | "test" | "all"
    std::vector<ManifestEntry> entries;

    double total_duration_s() const;
    std::vector<std::string> speaker_ids() const;  // unique, sorted
};

struct WordSpan {
    std::string word;
    double start_s = 0.0;
    double end_s = 0.0;
};

/// Fixed per-character emission templates plus synthesis knobs.
struct SynthesisSetup {
    std::string symbols = kDefaultSymbols;
    std::int64_t feature_dim = 16;
    int base_char_frames = 3;
    double noise_sigma = 0.05;
    std::vector<double> char_templates;  // symbols.size() x feature_dim

    static SynthesisSetup make(std::int64_t feature_dim, Rng& rng);
};

struct DomainSpec {
    double tempo_mean = 1.0;
    double tempo_jitter = 0.05;
    double speaker_sigma = 0.1;  // per-speaker per-character offset scale
    double domain_sigma = 0.0;   // shared per-character offset scale
    int speakers_per_cell = 5;   // per (group, gender) cell
    double seconds_per_speaker = 60.0;
    int n_val_per_cell = 2;
    int n_test_per_cell = 2;
};

struct GenSpec {
    std::int64_t feature_dim = 16;
    int base_char_frames = 3;
    double noise_sigma = 0.05;
    DomainSpec source{1.0, 0.05, 0.1, 0.0, 5, 60.0, 2, 2};
    DomainSpec target{1.25, 0.1, 0.5, 0.5, 3, 60.0, 2, 2};
    std::vector<std::string> texts;  // sentence pool; empty -> built-in pool

    static GenSpec from_json_file(const std::string& path);
    std::string to_json_string() const;
};

const std::vector<std::string>& default_sentence_pool();

SpeakerProfile gen_speaker(const std::string& domain, const std::string& group,
                           const std::string& gender, const SynthesisSetup& setup,
                           const DomainSpec& spec, const std::vector<double>& domain_offset,
                           Rng& rng);

/// Character-by-character synthesis: each character emits
/// round(base_char_frames * tempo) +/- 1 frames of template + perturbation +
/// N(0, noise_sigma) per entry.
Utterance synth_utterance(const std::string& text, const SpeakerProfile& profile,
                          const SynthesisSetup& setup, Rng& rng);

struct SegmentationResult {
    std::vector<std::pair<std::size_t, std::size_t>> segments;  // [first, last] word indices
    int oversized_words_dropped = 0;
};

/// Greedy left-to-right packing of word spans into pieces shorter than max_s;
/// pieces shorter than min_s are dropped afterwards. Words are never split;
/// a single word of max_s or more is dropped with a count.
SegmentationResult segment_words(const std::vector<WordSpan>& spans,
                                 double max_s = kMaxUtteranceSeconds,
                                 double min_s = kMinUtteranceSeconds);

/// Speaker-stratified split: per (group, gender) cell draws n_test then n_val
/// speakers without replacement; the remainder trains. Splits partition the
/// utterances and are speaker-disjoint.
std::array<Manifest, 3> split_speakers(const Manifest& manifest, int n_val_per_cell,
                                       int n_test_per_cell, Rng& rng);

/// Generates the full corpus under out_dir: feature files, per-domain
/// train/val/test manifests, and corpus.json describing the run.
void gen_corpus(const GenSpec& spec, std::uint64_t seed, const std::string& out_dir);

void save_manifest(const Manifest& manifest, const std::string& path);
Manifest load_manifest(const std::string& path);

/// Resolves feature files and maps transcripts to labels.
std::vector<TrainUtterance> load_utterances(const Manifest& manifest,
                                            const std::string& corpus_dir,
                                            const std::string& symbols = kDefaultSymbols);

/// Manifest path for a (domain, split) inside a generated corpus directory.
std::string manifest_path(const std::string& corpus_dir, const std::string& domain,
                          const std::string& split);

}  // namespace asr
