#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace asr {

struct WerRow {
    std::string condition;  // base_eval | ptm | mam | lam | conditional | ...
    std::string setting;    // e.g. "M-4/6-2/6-0/6", "L-4-1-1", "-"
    std::uint64_t seed = 0;
    std::string split;  // val | test
    double wer = 0.0;
    std::int64_t sub = 0;
    std::int64_t del = 0;
    std::int64_t ins = 0;
    std::int64_t ref_words = 0;
    double wall_clock_s = 0.0;
};

struct WerReport {
    std::vector<WerRow> rows;
};

/// Per-setting aggregate of a LAM sweep (5 seeds per setting).
struct LamSettingSummary {
    std::string setting;
    int n = 0;
    double wer_mean = 0.0;
    double wer_min = 0.0;
    double wer_max = 0.0;
    double wer_stddev = 0.0;  // sample standard deviation
    double wer_spread = 0.0;  // max - min
    std::vector<std::array<double, 3>> final_alphas;  // one per seed
};

inline const std::string kCsvHeader =
    "condition,setting,seed,split,wer,sub,del,ins,ref_words,wall_clock_s";

std::string report_to_csv(const WerReport& report);

/// Reads the canonical section of a report CSV (stops at a blank line).
WerReport report_from_csv_file(const std::string& path);

/// Canonical rows, a blank line, then a summary section (used by sweep-lam).
std::string lam_sweep_csv(const WerReport& report, const std::vector<LamSettingSummary>& summary);

std::vector<LamSettingSummary> summarize_lam_sweep(const WerReport& report,
                                                   const std::vector<std::string>& setting_order);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace asr
