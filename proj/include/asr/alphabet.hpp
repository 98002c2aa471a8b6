#pragma once

#include <string>
#include <vector>

namespace asr {

/// Character indices into the model alphabet. Index 0 is the CTC blank and
/// never appears in a LabelSeq; index i >= 1 is symbols[i-1].
using LabelSeq = std::vector<int>;

/// Non-blank symbols in alphabet order: space, a-z, apostrophe.
inline const std::string kDefaultSymbols = " abcdefghijklmnopqrstuvwxyz'";

/// Maps text to label indices. Throws ConfigError on characters outside the
/// symbol set.
LabelSeq text_to_labels(const std::string& text, const std::string& symbols = kDefaultSymbols);

std::string labels_to_text(const LabelSeq& labels, const std::string& symbols = kDefaultSymbols);

}  // namespace asr
