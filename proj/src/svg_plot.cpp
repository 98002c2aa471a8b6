#include "asr/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <vector>

#include "asr/errors.hpp"

namespace asr {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace

std::string wer_strip_svg(const WerReport& report, std::optional<double> ref_base_pct,
                          std::optional<double> ref_ptm_pct) {
    if (report.rows.empty()) throw ConfigError("plot: empty report");

    std::vector<std::string> settings;
    std::map<std::string, std::vector<double>> by_setting;
    for (const auto& row : report.rows) {
        const std::string key = row.setting == "-" ? row.condition : row.setting;
        if (!by_setting.count(key)) settings.push_back(key);
        by_setting[key].push_back(row.wer * 100.0);
    }

    double lo = 1e300, hi = -1e300;
    for (const auto& [_, v] : by_setting) {
        for (double w : v) {
            lo = std::min(lo, w);
            hi = std::max(hi, w);
        }
    }
    if (ref_base_pct) {
        lo = std::min(lo, *ref_base_pct);
        hi = std::max(hi, *ref_base_pct);
    }
    if (ref_ptm_pct) {
        lo = std::min(lo, *ref_ptm_pct);
        hi = std::max(hi, *ref_ptm_pct);
    }
    const double pad = std::max(1.0, (hi - lo) * 0.1);
    lo -= pad;
    hi += pad;

    const double width = 160.0 + 60.0 * static_cast<double>(settings.size());
    const double height = 360.0;
    const double left = 70.0, right = width - 20.0, top = 20.0, bottom = height - 70.0;
    auto ypos = [&](double wer) {
        return bottom - (wer - lo) / (hi - lo) * (bottom - top);
    };
    auto xpos = [&](std::size_t i) {
        return left + (static_cast<double>(i) + 0.5) * (right - left) /
                          static_cast<double>(settings.size());
    };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << bottom
        << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right << "\" y2=\""
        << bottom << "\" stroke=\"black\"/>\n";

    for (int k = 0; k <= 5; ++k) {
        const double wer = lo + (hi - lo) * k / 5.0;
        const double y = ypos(wer);
        svg << "<line x1=\"" << left - 4 << "\" y1=\"" << y << "\" x2=\"" << left << "\" y2=\"" << y
            << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << left - 8 << "\" y=\"" << y + 4
            << "\" font-size=\"11\" text-anchor=\"end\" font-family=\"sans-serif\">" << num(wer)
            << "</text>\n";
    }
    svg << "<text x=\"16\" y=\"" << (top + bottom) / 2
        << "\" font-size=\"12\" font-family=\"sans-serif\" transform=\"rotate(-90 16 "
        << (top + bottom) / 2 << ")\" text-anchor=\"middle\">WER (%)</text>\n";

    auto ref_line = [&](double pct, const char* label, const char* dash) {
        const double y = ypos(pct);
        svg << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << right << "\" y2=\"" << y
            << "\" stroke=\"red\" stroke-dasharray=\"" << dash << "\"/>\n";
        svg << "<text x=\"" << right << "\" y=\"" << y - 4
            << "\" font-size=\"10\" fill=\"red\" text-anchor=\"end\" font-family=\"sans-serif\">"
            << label << " " << num(pct) << "</text>\n";
    };
    if (ref_base_pct) ref_line(*ref_base_pct, "base", "1,0");
    if (ref_ptm_pct) ref_line(*ref_ptm_pct, "ptm", "6,4");

    for (std::size_t i = 0; i < settings.size(); ++i) {
        const double x = xpos(i);
        const auto& values = by_setting[settings[i]];
        double mean = 0.0;
        for (double w : values) mean += w;
        mean /= static_cast<double>(values.size());
        svg << "<line x1=\"" << x - 12 << "\" y1=\"" << ypos(mean) << "\" x2=\"" << x + 12
            << "\" y2=\"" << ypos(mean) << "\" stroke=\"steelblue\" stroke-width=\"2\"/>\n";
        for (std::size_t k = 0; k < values.size(); ++k) {
            // spread repeated seeds horizontally so they stay visible
            const double jitter = values.size() > 1
                                      ? (static_cast<double>(k) / (values.size() - 1) - 0.5) * 16.0
                                      : 0.0;
            svg << "<circle cx=\"" << x + jitter << "\" cy=\"" << ypos(values[k])
                << "\" r=\"3\" fill=\"black\" fill-opacity=\"0.7\"/>\n";
        }
        svg << "<text x=\"" << x << "\" y=\"" << bottom + 14
            << "\" font-size=\"10\" font-family=\"sans-serif\" text-anchor=\"end\" transform=\"rotate(-35 "
            << x << " " << bottom + 14 << ")\">" << settings[i] << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace asr
