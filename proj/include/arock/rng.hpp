/*
 * Copyright 2026 the arock authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace arock {

// ============================================================================
// Deterministic random number generation
//
// The simulated engine promises bit-identical traces for identical seeds on
// any platform.  std::mt19937_64's raw output sequence is fully specified by
// the standard, but the std::uniform_* distributions are not, so all draws go
// through the hand-rolled routines below.
// ============================================================================

// SplitMix64 step; used to decorrelate seeds and derive per-worker streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(scramble(seed)) {}

    // Derive an independent stream, e.g. one per concurrent worker.
    static Rng split(std::uint64_t master_seed, std::uint64_t stream_index) {
        std::uint64_t s = master_seed;
        (void)splitmix64(s);
        s ^= 0x632be59bd9b4e019ULL * (stream_index + 1);
        return Rng(splitmix64(s));
    }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on {0, 1, ..., n-1} without modulo bias (rejection on the top
    // partial bucket).
    std::uint64_t next_below(std::uint64_t n) {
        const std::uint64_t limit = ~std::uint64_t(0) - (~std::uint64_t(0) % n + 1) % n;
        std::uint64_t v = engine_();
        while (v > limit) v = engine_();
        return v % n;
    }

    // Uniform double in [0, 1) with 53 random bits.
    double next_unit() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Uniform double in (0, 1]; convenient for log() transforms.
    double next_unit_open_zero() { return 1.0 - next_unit(); }

    // Uniform double in [lo, hi).
    double next_range(double lo, double hi) {
        return lo + (hi - lo) * next_unit();
    }

    // Standard normal via Box-Muller (polar form avoided to keep the draw
    // count per call fixed at two, which keeps streams alignable).
    double next_gaussian() {
        const double u1 = next_unit_open_zero();
        const double u2 = next_unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

private:
    static std::uint64_t scramble(std::uint64_t seed) {
        // Avoid handing correlated small integers (0, 1, 2, ...) directly to
        // the engine.
        std::uint64_t s = seed;
        return splitmix64(s);
    }

    std::mt19937_64 engine_;
};

}  // namespace arock
