#include "asr/audio.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "asr/errors.hpp"

namespace asr {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint32_t read_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace

std::vector<double> read_wav_mono_16k(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read wav " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::size_t n = bytes.size();

    if (n < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0) {
        throw AudioFormatError(path + ": not a RIFF/WAVE file");
    }

    bool have_fmt = false;
    std::size_t pos = 12;
    std::vector<double> samples;
    while (pos + 8 <= n) {
        const std::uint32_t chunk_size = read_u32(p + pos + 4);
        const bool is_fmt = std::memcmp(p + pos, "fmt ", 4) == 0;
        const bool is_data = std::memcmp(p + pos, "data", 4) == 0;
        const std::size_t body = pos + 8;
        if (body + chunk_size > n) throw AudioFormatError(path + ": truncated chunk");

        if (is_fmt) {
            if (chunk_size < 16) throw AudioFormatError(path + ": short fmt chunk");
            const std::uint16_t format = read_u16(p + body);
            const std::uint16_t channels = read_u16(p + body + 2);
            const std::uint32_t rate = read_u32(p + body + 4);
            const std::uint16_t bits = read_u16(p + body + 14);
            if (format != 1) throw AudioFormatError(path + ": only PCM is supported");
            if (channels != 1) throw AudioFormatError(path + ": only mono is supported");
            if (rate != kWavSampleRate) {
                throw AudioFormatError(path + ": sample rate must be 16000, got " +
                                       std::to_string(rate));
            }
            if (bits != 16) throw AudioFormatError(path + ": only 16-bit samples are supported");
            have_fmt = true;
        } else if (is_data) {
            if (!have_fmt) throw AudioFormatError(path + ": data chunk before fmt chunk");
            samples.reserve(chunk_size / 2);
            for (std::size_t i = 0; i + 1 < chunk_size; i += 2) {
                const std::int16_t s =
                    static_cast<std::int16_t>(p[body + i] | (p[body + i + 1] << 8));
                samples.push_back(static_cast<double>(s) / 32768.0);
            }
            return samples;
        }
        pos = body + chunk_size + (chunk_size & 1);  // chunks are word-aligned
    }
    throw AudioFormatError(path + ": no data chunk");
}

TensorPtr spectrogram(std::span<const double> samples, int window, int step) {
    if (window < 2 || step < 1) throw ContractError("spectrogram: bad window/step");
    if (static_cast<int>(samples.size()) < window) {
        throw AudioFormatError("spectrogram: input shorter than one window");
    }
    const std::int64_t t_len =
        (static_cast<std::int64_t>(samples.size()) - window) / step + 1;
    const std::int64_t bins = window / 2 + 1;

    std::vector<double> hann(static_cast<std::size_t>(window));
    for (int i = 0; i < window; ++i) {
        hann[static_cast<std::size_t>(i)] = 0.5 * (1.0 - std::cos(2.0 * kPi * i / (window - 1)));
    }

    auto out = Tensor::zeros({t_len, bins});
    std::vector<double> frame(static_cast<std::size_t>(window));
    for (std::int64_t t = 0; t < t_len; ++t) {
        for (int i = 0; i < window; ++i) {
            frame[static_cast<std::size_t>(i)] =
                samples[static_cast<std::size_t>(t * step + i)] * hann[static_cast<std::size_t>(i)];
        }
        for (std::int64_t k = 0; k < bins; ++k) {
            double re = 0.0, im = 0.0;
            const double w = -2.0 * kPi * static_cast<double>(k) / window;
            for (int i = 0; i < window; ++i) {
                re += frame[static_cast<std::size_t>(i)] * std::cos(w * i);
                im += frame[static_cast<std::size_t>(i)] * std::sin(w * i);
            }
            out->at(t, k) = std::log1p(std::sqrt(re * re + im * im));
        }
    }
    return out;
}

}  // namespace asr
