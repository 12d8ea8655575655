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

#ifndef CSITOPT_VALIDATION_HPP
#define CSITOPT_VALIDATION_HPP

// Statistical self-checks of the closed forms against simulation, reported as JSON.

#include "mc/channel.hpp"
#include "mc/ergodic.hpp"
#include "mc/rvq.hpp"
#include "mc/stats.hpp"
#include "parallel.hpp"
#include "rates.hpp"
#include "types.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace csitopt
{

struct ValidationOptions
{
    bool quick = false;
    std::uint64_t seed = 1;
    double bound_inflation = 0.0; // nats added to every lower bound; > 0 must produce failures
    SystemConfig config;
};

struct CheckResult
{
    std::string name;
    nlohmann::json params;
    double value = 0.0;
    double threshold = 0.0;
    double margin = 0.0; // positive when passing
    bool pass = false;
};

struct ValidationReport
{
    std::vector<CheckResult> checks;
    bool pass() const
    {
        for (const auto& c : checks)
            if (!c.pass)
                return false;
        return !checks.empty();
    }
    nlohmann::json to_json() const
    {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& c : checks)
            arr.push_back({{"name", c.name},
                           {"params", c.params},
                           {"value", c.value},
                           {"threshold", c.threshold},
                           {"margin", c.margin},
                           {"pass", c.pass}});
        return {{"pass", pass()}, {"checks", arr}};
    }
};

namespace detail
{

inline CheckResult at_least(std::string name, nlohmann::json params, double value, double threshold)
{
    return {std::move(name), std::move(params), value, threshold, value - threshold, value >= threshold};
}

inline CheckResult at_most(std::string name, nlohmann::json params, double value, double threshold)
{
    return {std::move(name), std::move(params), value, threshold, threshold - value, value <= threshold};
}

// Least-squares slope of y against x.
inline double slope(const std::vector<double>& x, const std::vector<double>& y)
{
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        mx += x[i];
        my += y[i];
    }
    mx /= double(x.size());
    my /= double(y.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

} // namespace detail

// Simulated rate >= closed-form bound - 3 stderr for every CSIT source on a (T_tr, T_fb) grid,
// and bound-to-simulation gap <= 0.2 nats at T_tr = T_fb = 40.
inline void check_lower_bounds(const ValidationOptions& o, ValidationReport& rep)
{
    const std::vector<double> grid = o.quick ? std::vector<double>{8, 40} : std::vector<double>{8, 16, 40, 80};
    const std::size_t blocks = o.quick ? 20000 : 100000;
    std::vector<mc::CsitSource> sources;
    for (double tr : grid)
        sources.push_back(mc::CsitSource::mmse(tr));
    for (double tr : grid)
        for (double fb : grid)
        {
            sources.push_back(mc::CsitSource::analog(tr, fb));
            sources.push_back(mc::CsitSource::rvq(tr, fb));
            sources.push_back(mc::CsitSource::qam(tr, fb, 4));
        }
    std::uint64_t tag = 0;
    for (const auto& src : sources)
    {
        const auto r = mc::ergodic_rate_mc(o.config, src, blocks, mc::mix_seed(o.seed, tag++));
        const double bound = mc::closed_form_rate_bound(o.config, src) + o.bound_inflation;
        const nlohmann::json p{{"source", mc::to_string(src.kind)},
                               {"t_tr", src.t_tr},
                               {"t_fb", src.t_fb},
                               {"blocks", blocks},
                               {"estimate", r.rate.mean},
                               {"stderr", r.rate.std_error},
                               {"bound", bound}};
        rep.checks.push_back(detail::at_least("lower_bound", p, r.rate.mean + 3.0 * r.rate.std_error, bound));
        if (src.t_tr == 40 && (src.kind == mc::CsitSource::Kind::Mmse || src.t_fb == 40))
            rep.checks.push_back(detail::at_most("bound_tightness", p, r.rate.mean - bound, 0.2));
    }
}

// log2 E[sin^2] of RVQ against B has slope -1/(N_t-1) within 10%.
inline void check_quantizer_scaling(const ValidationOptions& o, ValidationReport& rep)
{
    const std::vector<int> bits{4, 6, 8, 10};
    const std::size_t draws = o.quick ? 2000 : 20000;
    for (int n : {2, 3, 4})
    {
        std::vector<double> x, y;
        for (int b : bits)
        {
            std::vector<double> d(draws);
            parallel_for(draws, [&](std::size_t i) {
                auto g = mc::block_engine(mc::mix_seed(o.seed, 1000 + 64 * n + b), i, mc::AuxStream);
                const auto dir = mc::isotropic_unit(g, n);
                d[i] = mc::rvq_quantize(dir, b, g).distortion;
            });
            x.push_back(b);
            y.push_back(std::log2(mc::summarize(d).mean));
        }
        const double s = detail::slope(x, y);
        const double target = -1.0 / (n - 1.0);
        rep.checks.push_back(detail::at_most("quantizer_scaling", {{"n_tx", n}, {"slope", s}, {"target", target}},
                                             std::abs(s / target - 1.0), 0.10));
    }
}

// Empirical per-coefficient MMSE equals 1 / (1 + T_tr rho / N_t) within 3 stderr.
inline void check_estimation(const ValidationOptions& o, ValidationReport& rep)
{
    const std::size_t blocks = o.quick ? 5000 : 50000;
    const int n = o.config.n_tx;
    for (double tr : {4.0, 8.0, 24.0, 80.0})
        for (double snr : {1.0, 10.0, 100.0})
        {
            std::vector<double> err(blocks);
            double theory = 0.0;
            const auto seed = mc::mix_seed(o.seed, std::uint64_t(2000 + tr * 1000 + snr));
            parallel_for(blocks, [&](std::size_t i) {
                auto gc = mc::block_engine(seed, i, mc::ChannelStream);
                auto ga = mc::block_engine(seed, i, mc::AuxStream);
                const auto h = mc::random_channel(gc, n, n);
                const auto e = mc::mmse_estimate(h, tr, snr, n, ga);
                err[i] = (h - e.estimate).squaredNorm() / double(n * n);
            });
            theory = 1.0 / (1.0 + tr * snr / n);
            const auto s = mc::summarize(err);
            rep.checks.push_back(detail::at_most("estimation_mse",
                                                 {{"t_tr", tr}, {"snr", snr}, {"empirical", s.mean},
                                                  {"stderr", s.std_error}, {"theory", theory}},
                                                 std::abs(s.mean - theory), 3.0 * s.std_error));
        }
}

// Perfect-CSIT simulation matches the exponential-integral closed form within 3 stderr.
inline void check_perfect_rate(const ValidationOptions& o, ValidationReport& rep)
{
    const std::size_t blocks = o.quick ? 20000 : 200000;
    for (double snr : {1.0, 10.0, 100.0})
    {
        SystemConfig c = o.config;
        c.snr = snr;
        const auto r = mc::ergodic_rate_mc(c, mc::CsitSource::perfect(), blocks, mc::mix_seed(o.seed, std::uint64_t(3000 + snr)));
        const double cf = zf_rate_perfect_csit(c.n_tx, snr);
        rep.checks.push_back(detail::at_most(
            "perfect_csit_rate",
            {{"snr", snr}, {"estimate", r.rate.mean}, {"stderr", r.rate.std_error}, {"closed_form", cf}},
            std::abs(r.rate.mean - cf), 3.0 * r.rate.std_error));
    }
}

inline ValidationReport validate_bounds(const ValidationOptions& o)
{
    o.config.validate();
    ValidationReport rep;
    check_lower_bounds(o, rep);
    check_quantizer_scaling(o, rep);
    check_estimation(o, rep);
    check_perfect_rate(o, rep);
    return rep;
}

} // namespace csitopt

#endif
