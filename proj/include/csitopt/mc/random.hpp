// SPDX-License-Identifier: Apache-2.0
//
// csitopt - training and feedback budgeting for the multiuser MIMO downlink
// Copyright (C) 2026 The csitopt authors
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

#ifndef CSITOPT_MC_RANDOM_HPP
#define CSITOPT_MC_RANDOM_HPP

// Seed -> stream mapping. Every (seed, block, stream) triple owns its own std::mt19937_64,
// seeded with the single 64-bit value mix_seed(mix_seed(seed, block), stream), so results
// do not depend on thread count or on the order blocks are visited.

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace csitopt::mc
{

using Engine = std::mt19937_64;
using cplx = std::complex<double>;

enum Stream : std::uint32_t
{
    ChannelStream = 0, // channel draws
    AuxStream = 1      // pilot noise, feedback noise, codebooks, error events
};

// splitmix64 finalizer; used to derive child seeds such as one per user count.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag)
{
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (tag + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline Engine block_engine(std::uint64_t seed, std::uint64_t block, std::uint32_t stream)
{
    return Engine(mix_seed(mix_seed(seed, block), stream));
}

// Circularly symmetric complex Gaussian with E|x|^2 = variance.
inline cplx complex_normal(Engine& g, double variance = 1.0)
{
    std::normal_distribution<double> n(0.0, std::sqrt(0.5 * variance));
    const double re = n(g);
    const double im = n(g);
    return {re, im};
}

inline double uniform01(Engine& g) { return std::uniform_real_distribution<double>(0.0, 1.0)(g); }

} // namespace csitopt::mc

#endif
