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

// Independent reference computations for the tests. Nothing here calls into the library.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

namespace oracle
{

// Composite Simpson rule on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000)
{
    if (n % 2)
        ++n;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i)
        s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

// E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!).
inline double e1_series(double x)
{
    double sum = 0.0, term = 1.0;
    for (int k = 1; k < 200; ++k)
    {
        term *= -x / k;
        sum += term / k;
        if (std::abs(term) < 1e-18)
            break;
    }
    return -std::numbers::egamma - std::log(x) - sum;
}

// E1(x) = int_0^1 exp(-x/u) / u du after t = x/u.
inline double e1_quadrature(double x)
{
    return simpson([x](double u) { return u <= 0.0 ? 0.0 : std::exp(-x / u) / u; }, 0.0, 1.0, 200000);
}

// Gaussian tail by quadrature on [x, x + 40].
inline double q_quadrature(double x)
{
    const double c = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    return simpson([c](double t) { return c * std::exp(-0.5 * t * t); }, x, x + 40.0, 400000);
}

// Exhaustive search over integer (T_tr, T_fb) with T_tr >= t_tr_min, T_fb >= t_fb_min, sum <= T.
struct GridBest
{
    double t_tr = 0, t_fb = 0, value = -std::numeric_limits<double>::infinity();
};

inline GridBest grid_2d(const std::function<double(double, double)>& f, int T, int t_tr_min, int t_fb_min,
                        int t_fb_max = -1)
{
    GridBest b;
    for (int a = t_tr_min; a <= T; ++a)
        for (int c = t_fb_min; a + c <= T && (t_fb_max < 0 || c <= t_fb_max); ++c)
        {
            const double v = f(a, c);
            if (v > b.value)
                b = {double(a), double(c), v};
        }
    return b;
}

// Fine grid minimization of g on [lo, hi].
inline std::pair<double, double> grid_min(const std::function<double(double)>& g, double lo, double hi,
                                          int n = 200000)
{
    double bx = lo, bv = g(lo);
    for (int i = 1; i <= n; ++i)
    {
        const double x = lo + (hi - lo) * i / n;
        const double v = g(x);
        if (v < bv)
        {
            bv = v;
            bx = x;
        }
    }
    return {bx, bv};
}

// E[ln(1 + a X)], X ~ Exp(1), by plain Monte Carlo.
inline std::pair<double, double> exp_log_mc(double a, std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 g(seed);
    std::exponential_distribution<double> e(1.0);
    double s = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        const double v = std::log1p(a * e(g));
        s += v;
        ss += v * v;
    }
    const double m = s / n;
    return {m, std::sqrt((ss / n - m * m) / n)};
}

// Square M-QAM symbol error rate by simulation: unit average energy, AWGN at SNR rho,
// minimum-distance detection per rail.
inline std::pair<double, double> qam_ser_mc(int m, double rho, std::size_t n, std::uint64_t seed)
{
    const int side = int(std::lround(std::sqrt(double(m))));
    const double es = 2.0 * (m - 1.0) / 3.0; // mean energy of odd-integer grid
    const double scale = 1.0 / std::sqrt(es);
    std::mt19937_64 g(seed);
    std::uniform_int_distribution<int> pick(0, side - 1);
    std::normal_distribution<double> noise(0.0, std::sqrt(0.5 / rho));
    auto detect = [&](double y) {
        const double lvl = y / scale;
        int idx = int(std::lround((lvl + (side - 1)) / 2.0));
        return std::clamp(idx, 0, side - 1);
    };
    std::size_t err = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
        const int a = pick(g), b = pick(g);
        const double xr = (2 * a - (side - 1)) * scale, xi = (2 * b - (side - 1)) * scale;
        if (detect(xr + noise(g)) != a || detect(xi + noise(g)) != b)
            ++err;
    }
    const double p = double(err) / n;
    return {p, std::sqrt(p * (1 - p) / n)};
}

// exp(int_{-1/2}^{1/2} ln(delta + S(xi)) dxi) - delta for the uniform spectrum on [-F, F],
// integrated numerically over the whole unit band.
inline double prediction_mmse_quadrature(double f, double delta)
{
    const double s = 1.0 / (2.0 * f);
    // Each piece gets its own integrand so the jump at |xi| = F never lands on a node of the wrong side.
    auto in_band = [=](double) { return std::log(delta + s); };
    auto out_band = [=](double) { return std::log(delta); };
    const double inside = simpson(in_band, -f, f, 2000);
    const double outside = 2.0 * simpson(out_band, f, 0.5, 2000);
    return std::exp(inside + outside) - delta;
}

} // namespace oracle
