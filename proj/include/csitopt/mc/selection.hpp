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

#ifndef CSITOPT_MC_SELECTION_HPP
#define CSITOPT_MC_SELECTION_HPP

// Greedy ZF user selection among K >= N_t users and the per-beam rate it buys.

#include "../parallel.hpp"
#include "../tradeoff.hpp"
#include "../types.hpp"
#include "channel.hpp"
#include "random.hpp"
#include "stats.hpp"
#include "summary.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace csitopt::mc
{

struct SelectionOutcome
{
    std::vector<int> chosen;  // in order of selection
    double sum_rate = 0.0;    // nats/use
    std::vector<double> per_user;
};

namespace detail
{

inline constexpr int max_selected = 16;
using SmallMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, 0, max_selected, max_selected>;

// Per-user rates ln(1 + p / [(A A^H)^-1]_ii) for the users in `set`, p = rho / |set|.
inline bool zf_subset_rates(const CMatrix& gram, const std::vector<int>& set, double snr, std::vector<double>& rates)
{
    const int s = int(set.size());
    SmallMatrix g(s, s);
    for (int a = 0; a < s; ++a)
        for (int b = 0; b < s; ++b)
            g(a, b) = gram(set[a], set[b]);
    Eigen::LLT<SmallMatrix> llt(g);
    if (llt.info() != Eigen::Success)
        return false;
    const SmallMatrix inv = llt.solve(SmallMatrix::Identity(s, s));
    rates.resize(std::size_t(s));
    const double p = snr / s;
    for (int a = 0; a < s; ++a)
    {
        const double d = inv(a, a).real();
        if (!(d > 0.0) || !std::isfinite(d))
            return false;
        rates[std::size_t(a)] = std::log1p(p / d);
    }
    return true;
}

} // namespace detail

// Start empty; add the user that maximizes the equal-power ZF sum rate of the selected set;
// stop when no addition helps or N_t users are selected. Power rho is split evenly over the selection.
inline SelectionOutcome greedy_user_selection(const CMatrix& h, int n_tx, double snr)
{
    const int k = int(h.rows());
    if (k < 1)
        throw std::invalid_argument("greedy_user_selection: need at least one user");
    if (h.cols() != n_tx)
        throw std::invalid_argument("greedy_user_selection: channel width must equal N_t");
    if (n_tx > detail::max_selected)
        throw std::invalid_argument("greedy_user_selection: at most 16 transmit antennas supported");
    const CMatrix gram = h * h.adjoint();
    SelectionOutcome out;
    std::vector<bool> used(std::size_t(k), false);
    std::vector<int> trial;
    std::vector<double> rates;
    while (int(out.chosen.size()) < std::min(n_tx, k))
    {
        int best = -1;
        double best_sum = out.sum_rate;
        std::vector<double> best_rates;
        for (int c = 0; c < k; ++c)
        {
            if (used[std::size_t(c)])
                continue;
            trial = out.chosen;
            trial.push_back(c);
            if (!detail::zf_subset_rates(gram, trial, snr, rates))
                continue;
            double s = 0.0;
            for (double r : rates)
                s += r;
            if (s > best_sum)
            {
                best_sum = s;
                best = c;
                best_rates = rates;
            }
        }
        if (best < 0)
            break;
        used[std::size_t(best)] = true;
        out.chosen.push_back(best);
        out.sum_rate = best_sum;
        out.per_user = std::move(best_rates);
    }
    return out;
}

// R^ZF_K: expected greedy-selection sum rate with perfect CSIT, per beam (divided by N_t).
inline Estimate selection_rate_mc(int n_tx, int users, double snr, std::size_t blocks, std::uint64_t seed,
                                  int threads = thread_count())
{
    if (users < 1 || blocks < 2)
        throw std::invalid_argument("selection_rate_mc: need users >= 1 and blocks >= 2");
    const ChannelBatch batch(seed, blocks, users, n_tx);
    std::vector<double> per_block(blocks);
    parallel_for(
        blocks, [&](std::size_t i) { per_block[i] = greedy_user_selection(batch.block(i), n_tx, snr).sum_rate / n_tx; },
        threads);
    return summarize(per_block);
}

// Write-once table of R^ZF_K, one MC run per K with seed mix_seed(seed, K).
// Optionally persisted as JSON lines so repeated experiments reuse earlier runs.
class SelectionRateCache
{
public:
    SelectionRateCache(int n_tx, double snr, std::size_t blocks, std::uint64_t seed, std::string path = {})
        : n_tx_(n_tx), snr_(snr), blocks_(blocks), seed_(seed), path_(std::move(path))
    {
        load();
    }

    Estimate get(int users)
    {
        {
            std::lock_guard lock(mutex_);
            if (auto it = table_.find(users); it != table_.end())
                return it->second;
        }
        const Estimate e = selection_rate_mc(n_tx_, users, snr_, blocks_, mix_seed(seed_, std::uint64_t(users)));
        std::lock_guard lock(mutex_);
        auto [it, inserted] = table_.emplace(users, e);
        if (inserted)
            append(users, e);
        return it->second;
    }

    double rate(int users) { return get(users).mean; }

    int n_tx() const { return n_tx_; }
    double snr() const { return snr_; }
    std::size_t blocks() const { return blocks_; }
    std::uint64_t seed() const { return seed_; }

private:
    void load();
    void append(int users, const Estimate& e);

    int n_tx_;
    double snr_;
    std::size_t blocks_;
    std::uint64_t seed_;
    std::string path_;
    std::mutex mutex_;
    std::map<int, Estimate> table_;
};

struct UserRate
{
    double w_sum = 0.0; // nats/use summed over the N_t beams
    double t_tr = 0.0;  // rounded training length
    int users = 0;
};

// (1 - T_tr/T)(R^ZF_K - ln(1 + (N_t-1)/T_tr + Delta)) maximized over T_tr, times N_t beams,
// with the K-user digital loss rho (1+rho)^(-T_fb / (K (N_t-1))).
inline UserRate w_of_tfb_users(const SystemConfig& cfg, double t_fb, int users, double r_zf_k)
{
    cfg.validate();
    const double delta = feedback_loss(FeedbackKind::DigitalErrorFree, t_fb, cfg.n_tx, cfg.snr, users);
    const auto s = separate_band_rate(r_zf_k, cfg.n_tx, delta, cfg.block_len);
    return {cfg.n_tx * s.w, s.t_tr_rounded, users};
}

// User count maximizing w(T_fb, K) over [k_min, k_max]; ties go to the smaller K.
inline UserRate best_user_count(const SystemConfig& cfg, double t_fb, SelectionRateCache& cache, int k_min,
                                int k_max)
{
    UserRate best;
    best.w_sum = -1.0;
    for (int k = k_min; k <= k_max; ++k)
    {
        const auto u = w_of_tfb_users(cfg, t_fb, k, cache.rate(k));
        if (u.w_sum > best.w_sum)
            best = u;
    }
    return best;
}

struct UserOperatingPoint
{
    int users = 0;
    double t_fb = 0.0;
    double t_tr = 0.0;
    double r_down_bps = 0.0;
    double r_up_bps = 0.0;
    double uplink_fraction = 0.0; // share of uplink bandwidth spent on feedback
    double objective = 0.0;
};

inline constexpr int max_feedback_users = 31;

// Joint (K, T_fb) grid search of lambda R_down + (1 - lambda) R_up.
inline UserOperatingPoint pareto_with_users(const SystemConfig& cfg, SelectionRateCache& cache, double lambda = 0.5,
                                            int k_max = max_feedback_users)
{
    cfg.validate();
    if (!(lambda > 0.0 && lambda < 1.0))
        throw std::invalid_argument("pareto_with_users: lambda must lie in (0, 1)");
    for (int k = cfg.n_tx; k <= k_max; ++k)
        cache.get(k);
    const double cap = std::floor(max_feedback_len(cfg));
    UserOperatingPoint best;
    best.objective = -std::numeric_limits<double>::infinity();
    for (int k = cfg.n_tx; k <= k_max; ++k)
    {
        const double r_k = cache.rate(k);
        for (double t = 0.0; t <= cap; t += 1.0)
        {
            const auto u = w_of_tfb_users(cfg, t, k, r_k);
            const double down = sum_rate_bps(u.w_sum, cfg.coherence_bw, 1.0);
            const double up = uplink_rate_bps(cfg, t);
            const double obj = lambda * down + (1.0 - lambda) * up;
            if (obj > best.objective)
                best = {k, t, u.t_tr, down, up, t / (cfg.uplink_bw * cfg.coherence_time), obj};
        }
    }
    return best;
}

inline nlohmann::json selection_cache_config(int n_tx, double snr, std::size_t blocks, int users)
{
    return {{"kind", "greedy_selection_rate"}, {"n_tx", n_tx}, {"snr", snr}, {"blocks", blocks}, {"users", users}};
}

inline void SelectionRateCache::load()
{
    if (path_.empty())
        return;
    std::ifstream in(path_);
    std::string line;
    while (std::getline(in, line))
    {
        if (line.empty())
            continue;
        const auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("config") || !j.contains("seed"))
            continue;
        const auto& c = j["config"];
        if (c.value("kind", "") != "greedy_selection_rate")
            continue;
        const int users = c.value("users", 0);
        if (c != selection_cache_config(n_tx_, snr_, blocks_, users) ||
            j["seed"].get<std::uint64_t>() != mix_seed(seed_, std::uint64_t(users)))
            continue;
        table_[users] = {j["estimate"].get<double>(), j["stderr"].get<double>(), j.value("samples", blocks_)};
    }
}

inline void SelectionRateCache::append(int users, const Estimate& e)
{
    if (path_.empty())
        return;
    append_json_line(path_, summary_record(selection_cache_config(n_tx_, snr_, blocks_, users),
                                           mix_seed(seed_, std::uint64_t(users)), e));
}

} // namespace csitopt::mc

#endif
