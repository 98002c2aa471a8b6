#pragma once

#include <optional>
#include <string>

#include "asr/report.hpp"

namespace asr {

/// Strip chart of WER (percent) per setting, one dot per row, with optional
/// horizontal reference lines for the base and PTM anchors.
std::string wer_strip_svg(const WerReport& report, std::optional<double> ref_base_pct,
                          std::optional<double> ref_ptm_pct);

}  // namespace asr
