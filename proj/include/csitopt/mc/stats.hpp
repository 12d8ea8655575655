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

#ifndef CSITOPT_MC_STATS_HPP
#define CSITOPT_MC_STATS_HPP

#include <cmath>
#include <cstddef>
#include <span>

namespace csitopt::mc
{

// Neumaier compensated sum.
class CompensatedSum
{
public:
    void add(double x)
    {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct Estimate
{
    double mean = 0.0;
    double std_error = 0.0; // standard error of the mean
    std::size_t samples = 0;
};

// Mean and standard error of i.i.d. samples, reduced in index order.
inline Estimate summarize(std::span<const double> xs)
{
    Estimate e;
    e.samples = xs.size();
    if (xs.empty())
        return e;
    CompensatedSum s;
    for (double x : xs)
        s.add(x);
    e.mean = s.value() / double(xs.size());
    if (xs.size() > 1)
    {
        CompensatedSum ss;
        for (double x : xs)
            ss.add((x - e.mean) * (x - e.mean));
        e.std_error = std::sqrt(ss.value() / double(xs.size() - 1) / double(xs.size()));
    }
    return e;
}

} // namespace csitopt::mc

#endif
