// Copyright 2026 The qpg Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
/**
 * @file
 * Counter-based splittable random number generation.
 *
 * Every stochastic routine in qpg takes an explicit seed. Streams are derived
 * by hashing (key, counter) pairs, so a child stream for job `i` can be built
 * from the parent key alone and sweeps give the same numbers regardless of how
 * jobs are scheduled across threads.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace qpg {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30U)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27U)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31U);
}

/**
 * @brief Stateless-in-spirit generator: output i is mix(key, i).
 *
 * Satisfies UniformRandomBitGenerator so it can be handed to std algorithms,
 * but qpg itself only uses the explicit uniform helpers below, which are
 * bit-identical on every platform.
 */
class CounterRng {
  public:
    using result_type = std::uint64_t;

    explicit constexpr CounterRng(std::uint64_t seed) noexcept
        : key_{mix64(seed ^ 0x6A09E667F3BCC909ULL)} {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept {
        return std::numeric_limits<result_type>::max();
    }

    constexpr result_type operator()() noexcept {
        const std::uint64_t c = counter_++;
        return mix64(key_ ^ mix64(c * 0xD1B54A32D192ED03ULL));
    }

    /// Independent child stream; same (parent, index) always yields the same child.
    [[nodiscard]] constexpr CounterRng split(std::uint64_t index) const noexcept {
        CounterRng child{0};
        child.key_ = mix64(key_ + mix64(index ^ 0xA0761D6478BD642FULL));
        return child;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept {
        return static_cast<double>((*this)() >> 11U) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) noexcept {
        return lo + (hi - lo) * uniform();
    }

    /// Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t below(std::uint64_t bound) noexcept {
        // Lemire's multiply-shift with rejection.
        __extension__ using u128 = unsigned __int128;
        u128 m = static_cast<u128>((*this)()) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                m = static_cast<u128>((*this)()) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64U);
    }

    bool bernoulli(double p) noexcept { return uniform() < p; }

    /// Angle drawn from U(-pi, pi).
    double angle() noexcept { return uniform(-std::numbers::pi, std::numbers::pi); }

    /// Derive a 64-bit seed for a child job.
    [[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t index) const noexcept {
        return mix64(key_ ^ mix64(index + 0x3C6EF372FE94F82BULL));
    }

  private:
    std::uint64_t key_;
    std::uint64_t counter_{0};
};

} // namespace qpg
