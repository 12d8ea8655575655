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

#ifndef CSITOPT_SPECIAL_HPP
#define CSITOPT_SPECIAL_HPP

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace csitopt
{

// Exponential integral E1(x) = int_x^inf exp(-t)/t dt for x > 0.
// Power series below x = 1, modified Lentz continued fraction above.
inline double exp_integral_e1(double x)
{
    if (!(x > 0.0))
        throw std::domain_error("exp_integral_e1: argument must be positive");
    if (std::isinf(x))
        return 0.0;

    constexpr double eps = 1e-16;
    constexpr int max_iter = 500;

    if (x <= 1.0)
    {
        // E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
        double sum = 0.0;
        double term = 1.0; // (-x)^k / k!
        for (int k = 1; k < max_iter; ++k)
        {
            term *= -x / k;
            const double add = term / k;
            sum += add;
            if (std::abs(add) < eps * std::abs(sum))
                break;
        }
        return -std::numbers::egamma - std::log(x) - sum;
    }

    // E1(x) = exp(-x) * 1/(x+1- 1/(x+3- 4/(x+5- ...)))
    const double tiny = std::numeric_limits<double>::min() / eps;
    double b = x + 1.0;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < max_iter; ++i)
    {
        const double a = -static_cast<double>(i) * i;
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        const double del = c * d;
        h *= del;
        if (std::abs(del - 1.0) < eps)
            break;
    }
    return h * std::exp(-x);
}

// exp(x) * E1(x), evaluated without overflow for large x.
inline double scaled_exp_integral_e1(double x)
{
    if (x > 1.0 && x < 700.0)
        return std::exp(x) * exp_integral_e1(x);
    if (x >= 700.0)
    {
        // asymptotic: (1/x) sum_k (-1)^k k! / x^k
        double term = 1.0 / x, sum = term;
        for (int k = 1; k < 30; ++k)
        {
            term *= -static_cast<double>(k) / x;
            sum += term;
            if (std::abs(term) < 1e-17 * std::abs(sum))
                break;
        }
        return sum;
    }
    return std::exp(x) * exp_integral_e1(x);
}

// Gaussian tail probability Q(x) = P(N(0,1) > x).
inline double q_function(double x)
{
    return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

} // namespace csitopt

#endif
