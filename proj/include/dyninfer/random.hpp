#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace dyninfer {

/// SplitMix64 (Steele, Lea, Flood 2014). Fully specified 64-bit generator, so
/// streams are identical on every platform and in any language that ports it.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t state) noexcept : state_(state) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    result_type operator()() noexcept {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix(state_);
    }

    /// Uniform double in [0, 1) from the top 53 bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Independent stream number `index` derived from a master seed:
    /// initial state = mix(seed + mix(index)).
    static SplitMix64 substream(std::uint64_t seed, std::uint64_t index) noexcept {
        return SplitMix64(mix(seed + mix(index)));
    }

private:
    std::uint64_t state_;
};

/// Inverse-CDF draw over index order. Falls back to the last index with
/// positive mass when rounding leaves u above the final cumulative sum.
inline std::size_t sample_categorical(std::span<const double> probs, double u) {
    double cumulative = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t k = 0; k < probs.size(); ++k) {
        if (probs[k] <= 0.0) continue;
        cumulative += probs[k];
        last_positive = k;
        if (u < cumulative) return k;
    }
    return last_positive;
}

} // namespace dyninfer
