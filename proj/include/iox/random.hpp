// SPDX-License-Identifier: Apache-2.0
//
// iox - wireless Internet-of-Experts over a JSON-RPC tool layer
// Copyright (C) 2026 The iox authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace iox
{
    // SplitMix64 finalizer over (seed, stream). Bijective in `stream` for a fixed
    // seed, so per-index derived seeds never collide.
    constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept
    {
        std::uint64_t z = seed * 0x9E3779B97F4A7C15ull + stream;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Seeded generator with platform-independent draws. std::mt19937_64 output
    /// is fixed by the standard; the distributions below are written out by hand
    /// because the standard library's are implementation-defined.
    class Rng
    {
    public:
        explicit Rng(std::uint64_t seed) : engine_(seed) {}

        std::uint64_t next() { return engine_(); }

        // Uniform in [0, 1) with 53 random bits.
        double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

        double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

        // Uniform integer in [0, bound), rejection-sampled to avoid modulo bias.
        std::size_t below(std::size_t bound)
        {
            const std::uint64_t b = bound;
            const std::uint64_t limit = UINT64_MAX - UINT64_MAX % b;
            std::uint64_t x;
            do
                x = engine_();
            while (x >= limit);
            return static_cast<std::size_t>(x % b);
        }

        template <typename T>
        void shuffle(std::vector<T> &items)
        {
            for (std::size_t i = items.size(); i > 1; --i)
                std::swap(items[i - 1], items[below(i)]);
        }

    private:
        std::mt19937_64 engine_;
    };
}
