#pragma once

#include <span>
#include <string>
#include <vector>

#include "asr/tensor.hpp"

namespace asr {

/// Reads a RIFF/WAVE file: PCM, mono, 16 kHz, 16 bit only. Samples scaled to
/// [-1, 1). Anything else raises AudioFormatError (no resampling).
std::vector<double> read_wav_mono_16k(const std::string& path);

inline constexpr int kWavSampleRate = 16000;
inline constexpr int kSpectrogramWindow = 320;  // 20 ms at 16 kHz
inline constexpr int kSpectrogramStep = 160;    // 10 ms

/// Hann-windowed magnitude DFT per frame, log(1+|X|) entries.
/// Output is T x (window/2 + 1) with T = floor((N - window)/step) + 1.
TensorPtr spectrogram(std::span<const double> samples, int window = kSpectrogramWindow,
                      int step = kSpectrogramStep);

}  // namespace asr
