#pragma once

#include <cstdint>
#include <vector>

namespace asr {

/// Deterministic 64-bit generator (splitmix64). All randomness in the project
/// flows through this class so that a seed fully determines every artifact,
/// independent of the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64();

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform();

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi);

    /// Standard normal via Box-Muller (two uniform draws per call).
    double gaussian();
    double gaussian(double mean, double sigma);

    /// Unbiased integer in [0, n), n >= 1.
    std::uint64_t below(std::uint64_t n);

    /// Derived independent stream; (seed, id) -> stream is deterministic.
    Rng fork(std::uint64_t stream_id) const;

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

}  // namespace asr
