#include "asr/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "asr/checkpoint.hpp"
#include "asr/errors.hpp"

namespace asr {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void validate_sentence(const std::string& text, const std::string& symbols) {
    if (text.empty()) throw ConfigError("corpus: empty sentence in the text pool");
    if (text.front() == ' ' || text.back() == ' ' || text.find("  ") != std::string::npos) {
        throw ConfigError("corpus: sentences must be single-space separated words: '" + text + "'");
    }
    for (char c : text) {
        if (symbols.find(c) == std::string::npos) {
            throw ConfigError(std::string("corpus: character '") + c + "' outside the alphabet");
        }
    }
}

std::vector<std::string> split_words(const std::string& text) {
    std::vector<std::string> words;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto space = text.find(' ', start);
        if (space == std::string::npos) {
            words.push_back(text.substr(start));
            break;
        }
        words.push_back(text.substr(start, space - start));
        start = space + 1;
    }
    return words;
}

/// Raw synthesis: frames for every character of `text` plus per-char counts.
struct RawSynthesis {
    std::vector<double> frames;  // T x feature_dim
    std::vector<int> char_frames;
};

RawSynthesis synth_frames(const std::string& text, const SpeakerProfile& profile,
                          const SynthesisSetup& setup, Rng& rng) {
    if (text.empty()) throw ConfigError("corpus: cannot synthesize empty text");
    const std::int64_t dim = setup.feature_dim;
    RawSynthesis out;
    out.char_frames.reserve(text.size());
    for (char c : text) {
        const auto pos = setup.symbols.find(c);
        if (pos == std::string::npos) {
            throw ConfigError(std::string("corpus: character '") + c + "' outside the alphabet");
        }
        const int base = static_cast<int>(
            std::lround(setup.base_char_frames * profile.tempo_factor));
        const int jitter = static_cast<int>(rng.below(3)) - 1;
        const int d = std::max(1, base + jitter);
        out.char_frames.push_back(d);
        const double* tpl = setup.char_templates.data() + pos * static_cast<std::size_t>(dim);
        const double* offset = profile.perturbation.data() + pos * static_cast<std::size_t>(dim);
        for (int k = 0; k < d; ++k) {
            for (std::int64_t f = 0; f < dim; ++f) {
                double v = tpl[f] + offset[f];
                if (setup.noise_sigma > 0.0) v += rng.gaussian(0.0, setup.noise_sigma);
                out.frames.push_back(v);
            }
        }
    }
    return out;
}

json domain_to_json(const DomainSpec& d) {
    return json{{"tempo_mean", d.tempo_mean},
                {"tempo_jitter", d.tempo_jitter},
                {"speaker_sigma", d.speaker_sigma},
                {"domain_sigma", d.domain_sigma},
                {"speakers_per_cell", d.speakers_per_cell},
                {"seconds_per_speaker", d.seconds_per_speaker},
                {"n_val_per_cell", d.n_val_per_cell},
                {"n_test_per_cell", d.n_test_per_cell}};
}

DomainSpec domain_from_json(const json& j, DomainSpec base) {
    if (j.contains("tempo_mean")) base.tempo_mean = j["tempo_mean"].get<double>();
    if (j.contains("tempo_jitter")) base.tempo_jitter = j["tempo_jitter"].get<double>();
    if (j.contains("speaker_sigma")) base.speaker_sigma = j["speaker_sigma"].get<double>();
    if (j.contains("domain_sigma")) base.domain_sigma = j["domain_sigma"].get<double>();
    if (j.contains("speakers_per_cell")) base.speakers_per_cell = j["speakers_per_cell"].get<int>();
    if (j.contains("seconds_per_speaker")) {
        base.seconds_per_speaker = j["seconds_per_speaker"].get<double>();
    }
    if (j.contains("n_val_per_cell")) base.n_val_per_cell = j["n_val_per_cell"].get<int>();
    if (j.contains("n_test_per_cell")) base.n_test_per_cell = j["n_test_per_cell"].get<int>();
    return base;
}

}  // namespace

double SpeakerProfile::perturbation_norm() const {
    double s = 0.0;
    for (double v : perturbation) s += v * v;
    return std::sqrt(s);
}

double Manifest::total_duration_s() const {
    double s = 0.0;
    for (const auto& e : entries) s += e.duration_s;
    return s;
}

std::vector<std::string> Manifest::speaker_ids() const {
    std::set<std::string> ids;
    for (const auto& e : entries) ids.insert(e.speaker_id);
    return {ids.begin(), ids.end()};
}

SynthesisSetup SynthesisSetup::make(std::int64_t feature_dim, Rng& rng) {
    SynthesisSetup setup;
    setup.feature_dim = feature_dim;
    const double scale = 1.0 / std::sqrt(static_cast<double>(feature_dim));
    setup.char_templates.resize(setup.symbols.size() * static_cast<std::size_t>(feature_dim));
    Rng stream = rng.fork(fnv1a("char-templates"));
    for (auto& v : setup.char_templates) v = stream.gaussian(0.0, scale);
    return setup;
}

const std::vector<std::string>& default_sentence_pool() {
    static const std::vector<std::string> pool = {
        "the quick brown fox jumps over the lazy dog near the quiet river bank",
        "she remembered the summer picnic where everyone talked about their garden",
        "my grandson calls me every sunday and we talk about the weather and birds",
        "we used to swim in the lake behind the old farmhouse every warm afternoon",
        "the doctor asked me to describe what i had for breakfast this morning",
        "i enjoy watching the sparrows gather seeds outside my kitchen window",
        "back in those days we walked two miles to school even in the deep snow",
        "my neighbor brings me fresh tomatoes and we sit on the porch for hours",
        "the radio played our favorite song while we danced in the living room",
        "he told a long story about fishing trips with his brother on the coast",
        "every spring the cherry tree in the yard fills the air with soft petals",
        "i keep all the letters my husband wrote to me during his years away",
        "the nurse was kind and explained everything twice so i would remember",
        "we drove along the coast and stopped at every little town for coffee",
        "the children next door help me carry groceries up the front steps",
        "it rained all week but the garden needed the water more than we did",
        "my sister and i baked bread every saturday morning before the market",
        "the old clock in the hallway still chimes every hour on the hour",
        "i learned to knit from my mother and now i make sweaters for everyone",
        "the bus to town runs twice a day past the white church on the corner",
        "we watched the fireworks from the roof and the whole sky turned gold",
        "he planted a row of sunflowers along the fence for the hummingbirds",
        "the librarian saves the large print mysteries for me every friday",
        "our cat sleeps in the warm spot by the window most of the afternoon",
        "i still remember the smell of my father's workshop full of cedar wood",
        "the morning walk around the pond keeps my knees from getting stiff",
        "she showed me photographs from the wedding and named every cousin",
        "the market sells sweet corn in august and we eat it straight away",
        "they repainted the community hall where we held the winter dances",
        "a good cup of tea and a crossword puzzle make the evening pass nicely",
    };
    return pool;
}

GenSpec GenSpec::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read gen spec " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw IoError("bad gen spec " + path + ": " + e.what());
    }
    GenSpec spec;
    if (j.contains("feature_dim")) spec.feature_dim = j["feature_dim"].get<std::int64_t>();
    if (j.contains("base_char_frames")) spec.base_char_frames = j["base_char_frames"].get<int>();
    if (j.contains("noise_sigma")) spec.noise_sigma = j["noise_sigma"].get<double>();
    if (j.contains("source")) spec.source = domain_from_json(j["source"], spec.source);
    if (j.contains("target")) spec.target = domain_from_json(j["target"], spec.target);
    if (j.contains("texts")) spec.texts = j["texts"].get<std::vector<std::string>>();
    return spec;
}

std::string GenSpec::to_json_string() const {
    json j;
    j["feature_dim"] = feature_dim;
    j["base_char_frames"] = base_char_frames;
    j["noise_sigma"] = noise_sigma;
    j["source"] = domain_to_json(source);
    j["target"] = domain_to_json(target);
    j["texts"] = texts;
    return j.dump();
}

SpeakerProfile gen_speaker(const std::string& domain, const std::string& group,
                           const std::string& gender, const SynthesisSetup& setup,
                           const DomainSpec& spec, const std::vector<double>& domain_offset,
                           Rng& rng) {
    SpeakerProfile profile;
    profile.domain = domain;
    profile.group = group;
    profile.gender = gender;
    profile.tempo_factor = std::max(0.1, rng.gaussian(spec.tempo_mean, spec.tempo_jitter));
    const std::size_t n = setup.symbols.size() * static_cast<std::size_t>(setup.feature_dim);
    if (!domain_offset.empty() && domain_offset.size() != n) {
        throw ConfigError("gen_speaker: domain offset size mismatch");
    }
    profile.perturbation.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        profile.perturbation[i] = (domain_offset.empty() ? 0.0 : domain_offset[i]) +
                                  rng.gaussian(0.0, spec.speaker_sigma);
    }
    return profile;
}

Utterance synth_utterance(const std::string& text, const SpeakerProfile& profile,
                          const SynthesisSetup& setup, Rng& rng) {
    auto raw = synth_frames(text, profile, setup, rng);
    const std::int64_t t = static_cast<std::int64_t>(raw.frames.size()) / setup.feature_dim;
    Utterance utt;
    utt.speaker_id = profile.speaker_id;
    utt.transcript = text;
    utt.features = Tensor::from({t, setup.feature_dim}, std::move(raw.frames));
    utt.duration_s = static_cast<double>(t) * kFrameStepSeconds;
    return utt;
}

SegmentationResult segment_words(const std::vector<WordSpan>& spans, double max_s, double min_s) {
    for (std::size_t i = 0; i < spans.size(); ++i) {
        if (!(spans[i].start_s < spans[i].end_s)) {
            throw ConfigError("segment_words: word span must have positive duration");
        }
        if (i > 0 && spans[i].start_s < spans[i - 1].end_s) {
            throw ConfigError("segment_words: word spans overlap or are out of order");
        }
    }

    SegmentationResult result;
    std::size_t seg_first = 0;
    bool open = false;
    auto close = [&](std::size_t last) {
        const double duration = spans[last].end_s - spans[seg_first].start_s;
        if (duration >= min_s) result.segments.emplace_back(seg_first, last);
    };
    for (std::size_t i = 0; i < spans.size(); ++i) {
        const double word_dur = spans[i].end_s - spans[i].start_s;
        if (word_dur >= max_s) {
            // A single word that cannot fit any segment is dropped.
            if (open) close(i - 1);
            open = false;
            ++result.oversized_words_dropped;
            continue;
        }
        if (!open) {
            seg_first = i;
            open = true;
            continue;
        }
        if (spans[i].end_s - spans[seg_first].start_s < max_s) continue;  // extend
        close(i - 1);
        seg_first = i;
    }
    if (open) close(spans.size() - 1);
    return result;
}

std::array<Manifest, 3> split_speakers(const Manifest& manifest, int n_val_per_cell,
                                       int n_test_per_cell, Rng& rng) {
    if (n_val_per_cell < 0 || n_test_per_cell < 0) {
        throw ConfigError("split_speakers: negative split sizes");
    }

    // Unique speakers per (group, gender) cell, sorted for determinism.
    std::map<std::pair<std::string, std::string>, std::set<std::string>> cells;
    std::map<std::string, std::pair<std::string, std::string>> speaker_cell;
    for (const auto& e : manifest.entries) {
        cells[{e.group, e.gender}].insert(e.speaker_id);
        speaker_cell[e.speaker_id] = {e.group, e.gender};
    }

    std::set<std::string> val_speakers, test_speakers;
    for (const auto& [cell, members] : cells) {
        const int need = n_val_per_cell + n_test_per_cell;
        if (static_cast<int>(members.size()) < need) {
            throw ConfigError("split_speakers: cell (" + cell.first + ", " + cell.second +
                              ") has " + std::to_string(members.size()) + " speakers, needs " +
                              std::to_string(need));
        }
        std::vector<std::string> pool(members.begin(), members.end());
        auto draw = [&](int n, std::set<std::string>& into) {
            for (int k = 0; k < n; ++k) {
                const std::size_t i = static_cast<std::size_t>(rng.below(pool.size()));
                into.insert(pool[i]);
                pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(i));
            }
        };
        draw(n_test_per_cell, test_speakers);  // test drawn first, then val
        draw(n_val_per_cell, val_speakers);
    }

    std::array<Manifest, 3> splits;
    splits[0].split = "train";
    splits[1].split = "val";
    splits[2].split = "test";
    for (const auto& e : manifest.entries) {
        if (test_speakers.count(e.speaker_id)) {
            splits[2].entries.push_back(e);
        } else if (val_speakers.count(e.speaker_id)) {
            splits[1].entries.push_back(e);
        } else {
            splits[0].entries.push_back(e);
        }
    }
    return splits;
}

namespace {

Manifest generate_domain(const std::string& domain, const DomainSpec& spec,
                         const SynthesisSetup& setup, const std::vector<std::string>& pool,
                         const std::string& out_dir, Rng& rng) {
    // Shared per-character offset that defines the domain's acoustic shift.
    std::vector<double> domain_offset(
        setup.symbols.size() * static_cast<std::size_t>(setup.feature_dim), 0.0);
    {
        Rng stream = rng.fork(fnv1a("domain-offset:" + domain));
        for (auto& v : domain_offset) v = stream.gaussian(0.0, spec.domain_sigma);
    }

    Manifest manifest;
    manifest.split = "all";
    const std::string prefix = domain == "source" ? "src" : "tgt";
    for (const std::string group : {"mci", "healthy"}) {
        for (const std::string gender : {"f", "m"}) {
            for (int i = 0; i < spec.speakers_per_cell; ++i) {
                char idbuf[64];
                std::snprintf(idbuf, sizeof(idbuf), "%s_%s_%s%02d", prefix.c_str(), group.c_str(),
                              gender.c_str(), i);
                const std::string speaker_id = idbuf;
                Rng speaker_rng = rng.fork(fnv1a("speaker:" + speaker_id));
                SpeakerProfile profile =
                    gen_speaker(domain, group, gender, setup, spec, domain_offset, speaker_rng);
                profile.speaker_id = speaker_id;

                double total = 0.0;
                int utt_counter = 0;
                int attempts = 0;
                const double stop_at = spec.seconds_per_speaker - 3.0;
                while (total < stop_at) {
                    if (++attempts > 200) {
                        throw ConfigError("gen_corpus: cannot reach the duration target for " +
                                          speaker_id);
                    }
                    // A narration of a few sentences, then cut along word
                    // boundaries into utterance-sized pieces.
                    const int n_sentences = 3 + static_cast<int>(speaker_rng.below(3));
                    std::string narration;
                    for (int s = 0; s < n_sentences; ++s) {
                        if (s) narration += ' ';
                        narration += pool[speaker_rng.below(pool.size())];
                    }
                    auto raw = synth_frames(narration, profile, setup, speaker_rng);

                    // Word spans from the synthesis ground truth.
                    auto words = split_words(narration);
                    std::vector<WordSpan> spans;
                    std::vector<std::int64_t> word_start_frame(words.size());
                    std::vector<std::int64_t> word_end_frame(words.size());
                    {
                        std::size_t char_idx = 0;
                        std::int64_t frame = 0;
                        for (std::size_t w = 0; w < words.size(); ++w) {
                            if (w) {
                                frame += raw.char_frames[char_idx];  // the separating space
                                ++char_idx;
                            }
                            word_start_frame[w] = frame;
                            for (std::size_t k = 0; k < words[w].size(); ++k) {
                                frame += raw.char_frames[char_idx];
                                ++char_idx;
                            }
                            word_end_frame[w] = frame;
                            spans.push_back(WordSpan{words[w],
                                                     word_start_frame[w] * kFrameStepSeconds,
                                                     word_end_frame[w] * kFrameStepSeconds});
                        }
                    }

                    auto segmentation = segment_words(spans);
                    for (const auto& [first, last] : segmentation.segments) {
                        if (total >= stop_at) break;
                        const std::int64_t f0 = word_start_frame[first];
                        const std::int64_t f1 = word_end_frame[last];
                        const std::int64_t frames = f1 - f0;
                        std::string transcript = words[first];
                        for (std::size_t w = first + 1; w <= last; ++w) {
                            transcript += ' ';
                            transcript += words[w];
                        }

                        char uttbuf[96];
                        std::snprintf(uttbuf, sizeof(uttbuf), "%s_u%03d", speaker_id.c_str(),
                                      utt_counter++);
                        ManifestEntry entry;
                        entry.utt_id = uttbuf;
                        entry.speaker_id = speaker_id;
                        entry.domain = domain;
                        entry.group = group;
                        entry.gender = gender;
                        entry.transcript = transcript;
                        entry.feature_path = "features/" + entry.utt_id + ".ft";
                        entry.frames = frames;
                        entry.duration_s = static_cast<double>(frames) * kFrameStepSeconds;

                        std::vector<double> slice(
                            raw.frames.begin() + f0 * setup.feature_dim,
                            raw.frames.begin() + f1 * setup.feature_dim);
                        auto features = Tensor::from({frames, setup.feature_dim}, std::move(slice));
                        save_tensor_file(out_dir + "/" + entry.feature_path, *features);

                        total += entry.duration_s;
                        manifest.entries.push_back(std::move(entry));
                    }
                }
            }
        }
    }
    return manifest;
}

}  // namespace

void gen_corpus(const GenSpec& spec, std::uint64_t seed, const std::string& out_dir) {
    if (spec.feature_dim < 1) throw ConfigError("gen_corpus: feature_dim must be positive");
    const std::vector<std::string>& pool = spec.texts.empty() ? default_sentence_pool() : spec.texts;
    for (const auto& text : pool) validate_sentence(text, kDefaultSymbols);

    fs::create_directories(out_dir);
    fs::create_directories(out_dir + "/features");

    Rng rng(seed);
    SynthesisSetup setup = SynthesisSetup::make(spec.feature_dim, rng);
    setup.base_char_frames = spec.base_char_frames;
    setup.noise_sigma = spec.noise_sigma;

    for (const std::string domain : {"source", "target"}) {
        const DomainSpec& dspec = domain == "source" ? spec.source : spec.target;
        Manifest all = generate_domain(domain, dspec, setup, pool, out_dir, rng);
        Rng split_rng = rng.fork(fnv1a("split:" + domain));
        auto splits = split_speakers(all, dspec.n_val_per_cell, dspec.n_test_per_cell, split_rng);
        for (const auto& m : splits) {
            save_manifest(m, manifest_path(out_dir, domain, m.split));
        }
    }

    nlohmann::json j;
    j["seed"] = seed;
    j["spec"] = nlohmann::json::parse(spec.to_json_string());
    std::ofstream out(out_dir + "/corpus.json", std::ios::binary);
    if (!out) throw IoError("cannot write " + out_dir + "/corpus.json");
    out << j.dump(2) << "\n";
}

std::string manifest_path(const std::string& corpus_dir, const std::string& domain,
                          const std::string& split) {
    return corpus_dir + "/" + domain + "_" + split + ".jsonl";
}

void save_manifest(const Manifest& manifest, const std::string& path) {
    std::set<std::string> seen;
    for (const auto& e : manifest.entries) {
        if (!seen.insert(e.utt_id).second) {
            throw ConfigError("manifest: duplicate utt_id " + e.utt_id);
        }
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write manifest " + path);
    for (const auto& e : manifest.entries) {
        json j;
        j["utt_id"] = e.utt_id;
        j["speaker_id"] = e.speaker_id;
        j["domain"] = e.domain;
        j["group"] = e.group;
        j["gender"] = e.gender;
        j["transcript"] = e.transcript;
        j["feature_path"] = e.feature_path;
        j["frames"] = e.frames;
        j["duration_s"] = e.duration_s;
        out << j.dump() << "\n";
    }
    if (!out) throw IoError("manifest write failed for " + path);
}

Manifest load_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read manifest " + path);
    Manifest manifest;
    const auto stem = fs::path(path).stem().string();
    const auto underscore = stem.rfind('_');
    manifest.split = underscore == std::string::npos ? stem : stem.substr(underscore + 1);

    std::string line;
    std::set<std::string> seen;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw IoError("bad manifest line in " + path + ": " + e.what());
        }
        ManifestEntry e;
        e.utt_id = j.at("utt_id").get<std::string>();
        e.speaker_id = j.at("speaker_id").get<std::string>();
        e.domain = j.at("domain").get<std::string>();
        e.group = j.at("group").get<std::string>();
        e.gender = j.at("gender").get<std::string>();
        e.transcript = j.at("transcript").get<std::string>();
        e.feature_path = j.at("feature_path").get<std::string>();
        e.frames = j.at("frames").get<std::int64_t>();
        e.duration_s = j.at("duration_s").get<double>();
        if (!seen.insert(e.utt_id).second) {
            throw IoError("manifest " + path + " has duplicate utt_id " + e.utt_id);
        }
        manifest.entries.push_back(std::move(e));
    }
    return manifest;
}

std::vector<TrainUtterance> load_utterances(const Manifest& manifest, const std::string& corpus_dir,
                                            const std::string& symbols) {
    std::vector<TrainUtterance> out;
    out.reserve(manifest.entries.size());
    for (const auto& e : manifest.entries) {
        TrainUtterance utt;
        utt.utt_id = e.utt_id;
        utt.transcript = e.transcript;
        utt.features = load_tensor_file(corpus_dir + "/" + e.feature_path);
        if (utt.features->ndim() != 2 || utt.features->shape[0] != e.frames) {
            throw IoError("feature file disagrees with manifest for " + e.utt_id);
        }
        utt.labels = text_to_labels(e.transcript, symbols);
        out.push_back(std::move(utt));
    }
    return out;
}

}  // namespace asr
