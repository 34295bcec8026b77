// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace xtalk {

/// Independent random streams used by the library. Every draw is addressed by
/// (seed, stream, counters...) so results never depend on execution order.
enum class Stream : std::uint64_t {
    FextCoupling = 1,
    DiagonalPhase = 2,
    OffDiagonalPhase = 3,
    PrecoderError = 4,
    EstimationError = 5,
    QuantizerDither = 6,
};

/// SplitMix64 finalizer: a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Folds a seed, a stream tag and a list of counters into one 64-bit key.
constexpr std::uint64_t derive_key(std::uint64_t seed, Stream stream,
                                   std::initializer_list<std::uint64_t> counters) noexcept {
    std::uint64_t h = mix64(seed ^ 0x6a09e667f3bcc909ULL);
    h = mix64(h ^ static_cast<std::uint64_t>(stream));
    for (std::uint64_t c : counters) h = mix64(h ^ mix64(c + 0x243f6a8885a308d3ULL));
    return h;
}

/// Counter-mode generator: output n is mix64(key + n * golden). Satisfies
/// UniformRandomBitGenerator so it plugs into <random> distributions.
class CounterStream {
public:
    using result_type = std::uint64_t;

    explicit constexpr CounterStream(std::uint64_t key) noexcept : key_(key) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept {
        return mix64(key_ + 0x9e3779b97f4a7c15ULL * (++counter_));
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform on [-1, 1).
    double uniform_symmetric() noexcept {
        return static_cast<double>((*this)() >> 11) * 0x1.0p-52 - 1.0;
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace xtalk
