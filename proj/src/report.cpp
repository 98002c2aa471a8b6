#include "asr/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "asr/errors.hpp"
#include "asr/format.hpp"

namespace asr {

namespace {

std::string fmt_wall_clock(double seconds) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", seconds);
    return buf;
}

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

std::string row_to_csv(const WerRow& row) {
    std::ostringstream out;
    out << row.condition << ',' << row.setting << ',' << row.seed << ',' << row.split << ','
        << fmt_double(row.wer) << ',' << row.sub << ',' << row.del << ',' << row.ins << ','
        << row.ref_words << ',' << fmt_wall_clock(row.wall_clock_s);
    return out.str();
}

}  // namespace

std::string report_to_csv(const WerReport& report) {
    std::string out = kCsvHeader + "\n";
    for (const auto& row : report.rows) out += row_to_csv(row) + "\n";
    return out;
}

WerReport report_from_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read report " + path);
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) {
        throw IoError("report " + path + " has an unexpected header");
    }
    WerReport report;
    while (std::getline(in, line)) {
        if (line.empty()) break;  // summary section follows
        auto f = split_commas(line);
        if (f.size() != 10) throw IoError("bad report row in " + path + ": '" + line + "'");
        WerRow row;
        row.condition = f[0];
        row.setting = f[1];
        row.seed = std::stoull(f[2]);
        row.split = f[3];
        row.wer = parse_double(f[4]);
        row.sub = std::stoll(f[5]);
        row.del = std::stoll(f[6]);
        row.ins = std::stoll(f[7]);
        row.ref_words = std::stoll(f[8]);
        row.wall_clock_s = parse_double(f[9]);
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::vector<LamSettingSummary> summarize_lam_sweep(const WerReport& report,
                                                   const std::vector<std::string>& setting_order) {
    std::map<std::string, std::vector<const WerRow*>> by_setting;
    for (const auto& row : report.rows) by_setting[row.setting].push_back(&row);

    std::vector<LamSettingSummary> out;
    for (const auto& setting : setting_order) {
        const auto it = by_setting.find(setting);
        if (it == by_setting.end()) continue;
        LamSettingSummary s;
        s.setting = setting;
        s.n = static_cast<int>(it->second.size());
        s.wer_min = s.wer_max = it->second.front()->wer;
        double sum = 0.0;
        for (const auto* row : it->second) {
            sum += row->wer;
            s.wer_min = std::min(s.wer_min, row->wer);
            s.wer_max = std::max(s.wer_max, row->wer);
        }
        s.wer_mean = sum / s.n;
        double sq = 0.0;
        for (const auto* row : it->second) {
            sq += (row->wer - s.wer_mean) * (row->wer - s.wer_mean);
        }
        s.wer_stddev = s.n > 1 ? std::sqrt(sq / (s.n - 1)) : 0.0;
        s.wer_spread = s.wer_max - s.wer_min;
        out.push_back(std::move(s));
    }
    return out;
}

std::string lam_sweep_csv(const WerReport& report, const std::vector<LamSettingSummary>& summary) {
    std::string out = report_to_csv(report);
    out += "\n";
    out += "setting,n,wer_mean,wer_min,wer_max,wer_stddev,wer_spread,final_alphas\n";
    for (const auto& s : summary) {
        out += s.setting + "," + std::to_string(s.n) + "," + fmt_double(s.wer_mean) + "," +
               fmt_double(s.wer_min) + "," + fmt_double(s.wer_max) + "," +
               fmt_double(s.wer_stddev) + "," + fmt_double(s.wer_spread) + ",";
        for (std::size_t i = 0; i < s.final_alphas.size(); ++i) {
            if (i) out += ";";
            out += fmt_double(s.final_alphas[i][0]) + "|" + fmt_double(s.final_alphas[i][1]) +
                   "|" + fmt_double(s.final_alphas[i][2]);
        }
        out += "\n";
    }
    return out;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << content;
    if (!out) throw IoError("write failed for " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace asr
