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

#ifndef CSITOPT_MC_RVQ_HPP
#define CSITOPT_MC_RVQ_HPP

// Random vector quantization of channel directions. The codebook is 2^B i.i.d.
// isotropic unit vectors drawn fresh for each call.

#include "channel.hpp"
#include "random.hpp"

#include <cmath>
#include <stdexcept>

namespace csitopt::mc
{

struct Quantized
{
    long index = -1;         // codeword index; -1 when drawn from the distortion law
    CVector direction;       // unit vector
    double distortion = 0.0; // sin^2 of the angle to the input direction
};

inline CVector isotropic_unit(Engine& g, int n)
{
    CVector v(n);
    for (int i = 0; i < n; ++i)
        v(i) = complex_normal(g);
    return v.normalized();
}

inline constexpr int max_codebook_bits = 20;

// Explicit codebook search: argmax |<c, d>|^2 over 2^B random codewords.
inline Quantized rvq_quantize(const CVector& direction, int bits, Engine& g)
{
    if (bits < 0 || bits > max_codebook_bits)
        throw std::invalid_argument("rvq_quantize: bits must lie in [0, 20]");
    const double norm = direction.norm();
    if (!(norm > 0.0))
        throw std::invalid_argument("rvq_quantize: zero direction");
    const CVector d = direction / norm;
    const long size = 1L << bits;
    Quantized best;
    double best_corr = -1.0;
    for (long i = 0; i < size; ++i)
    {
        CVector c = isotropic_unit(g, int(d.size()));
        const double corr = std::norm(c.dot(d));
        if (corr > best_corr)
        {
            best_corr = corr;
            best.index = i;
            best.direction = std::move(c);
        }
    }
    best.distortion = std::max(0.0, 1.0 - best_corr);
    return best;
}

// Same ensemble without materializing the codebook; works for any real B >= 0.
// The best of 2^B codewords has P(sin^2 > z) = (1 - z^(N-1))^(2^B), sampled by inversion,
// and its residual points along an isotropic direction orthogonal to d.
inline Quantized rvq_quantize_sampled(const CVector& direction, double bits, Engine& g)
{
    if (!(bits >= 0.0))
        throw std::invalid_argument("rvq_quantize_sampled: bits must be non-negative");
    const int n = int(direction.size());
    const double norm = direction.norm();
    if (!(norm > 0.0))
        throw std::invalid_argument("rvq_quantize_sampled: zero direction");
    const CVector d = direction / norm;
    Quantized out;
    if (n == 1)
    {
        out.direction = d;
        return out;
    }
    const double u = uniform01(g);
    const double z_pow = -std::expm1(std::log1p(-u) * std::exp2(-bits));
    const double z = std::pow(z_pow, 1.0 / (n - 1.0));
    CVector s = isotropic_unit(g, n);
    s -= d * d.dot(s);
    s.normalize();
    out.direction = std::sqrt(1.0 - z) * d + std::sqrt(z) * s;
    out.distortion = z;
    return out;
}

// Codebook search for small integer B, distortion sampler otherwise.
inline Quantized rvq_quantize_auto(const CVector& direction, double bits, Engine& g, int codebook_limit = 10)
{
    const double rb = std::round(bits);
    if (std::abs(bits - rb) < 1e-12 && rb <= codebook_limit)
        return rvq_quantize(direction, int(rb), g);
    return rvq_quantize_sampled(direction, bits, g);
}

} // namespace csitopt::mc

#endif
