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

#ifndef CSITOPT_SCALAR_SEARCH_HPP
#define CSITOPT_SCALAR_SEARCH_HPP

#include <cmath>
#include <algorithm>
#include <stdexcept>

namespace csitopt
{

struct ScalarOptimum
{
    double x = 0.0;
    double value = 0.0;
    int iterations = 0;
};

// Maximise a concave f on [lo, hi] by bisecting on the sign of its derivative.
template <typename F, typename DF>
ScalarOptimum maximize_by_derivative(F&& f, DF&& df, double lo, double hi, double tol = 1e-6)
{
    if (!(lo <= hi))
        throw std::invalid_argument("maximize_by_derivative: empty interval");
    if (df(lo) <= 0.0)
        return {lo, f(lo), 0};
    if (df(hi) >= 0.0)
        return {hi, f(hi), 0};
    int it = 0;
    while (hi - lo > tol && it < 200)
    {
        const double mid = 0.5 * (lo + hi);
        if (df(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
        ++it;
    }
    const double x = 0.5 * (lo + hi);
    return {x, f(x), it};
}

// Golden-section search for the maximum of a unimodal f on [lo, hi].
template <typename F>
ScalarOptimum golden_section_maximize(F&& f, double lo, double hi, double tol = 1e-6)
{
    if (!(lo <= hi))
        throw std::invalid_argument("golden_section_maximize: empty interval");
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    int it = 0;
    while (b - a > tol && it < 300)
    {
        if (fc >= fd)
        {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        }
        else
        {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        ++it;
    }
    // endpoints can win for monotone f
    ScalarOptimum best{0.5 * (a + b), f(0.5 * (a + b)), it};
    for (double e : {lo, hi})
    {
        const double fe = f(e);
        if (fe > best.value)
            best = {e, fe, it};
    }
    return best;
}

// Coarse uniform scan followed by golden-section refinement around the best cell.
// Used where unimodality is expected but flat plateaus (zero rate) can occur.
template <typename F>
ScalarOptimum scan_golden_maximize(F&& f, double lo, double hi, int cells = 64, double tol = 1e-6)
{
    if (!(lo <= hi))
        throw std::invalid_argument("scan_golden_maximize: empty interval");
    if (hi - lo <= tol)
        return {lo, f(lo), 0};
    const double h = (hi - lo) / cells;
    int best_i = 0;
    double best_v = f(lo);
    for (int i = 1; i <= cells; ++i)
    {
        const double v = f(lo + i * h);
        if (v > best_v)
        {
            best_v = v;
            best_i = i;
        }
    }
    const double a = std::max(lo, lo + (best_i - 1) * h);
    const double b = std::min(hi, lo + (best_i + 1) * h);
    auto r = golden_section_maximize(f, a, b, tol);
    r.iterations += cells + 1;
    if (best_v > r.value)
        r = {lo + best_i * h, best_v, r.iterations};
    return r;
}

// Root of an increasing function on [lo, hi] (bisection). Requires fn(lo) <= 0 <= fn(hi).
template <typename F>
ScalarOptimum bisect_increasing_root(F&& fn, double lo, double hi, double tol = 1e-10)
{
    double flo = fn(lo), fhi = fn(hi);
    if (flo > 0.0 || fhi < 0.0)
        throw std::invalid_argument("bisect_increasing_root: root not bracketed");
    int it = 0;
    while (hi - lo > tol * std::max(1.0, std::abs(lo)) && it < 300)
    {
        const double mid = 0.5 * (lo + hi);
        if (fn(mid) < 0.0)
            lo = mid;
        else
            hi = mid;
        ++it;
    }
    const double x = 0.5 * (lo + hi);
    return {x, fn(x), it};
}

} // namespace csitopt

#endif
