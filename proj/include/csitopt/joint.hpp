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

#ifndef CSITOPT_JOINT_HPP
#define CSITOPT_JOINT_HPP

// Joint training / feedback length optimisation when both consume downlink
// channel uses of the same coherence block:
//
//   max_{T_tr + T_fb <= T} (1 - (T_tr + T_fb)/T) (R^ZF - ln(1 + g(T_tr, T_fb)))
//
// solved in two steps: an inner split of a total budget T_t, then a concave
// 1-D search over T_t. Lengths are real-valued during the search and rounded
// to the best integer neighbour for reporting.

#include "rates.hpp"
#include "scalar_search.hpp"
#include "types.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <tuple>
#include <vector>

namespace csitopt
{

struct OptimizationResult
{
    ResourceSplit split;              // integer lengths
    double net_rate = 0.0;            // nats/use/user at `split`
    ResourceSplit continuous;         // real-valued optimum
    double continuous_net_rate = 0.0;
    ResourceSplit upper_bound_split;  // analytic T~ bounds
    double effective_gap_bound = 0.0; // bound on R^ZF - net_rate
    std::optional<double> lagrange_mu;
    int iterations = 0;
    bool boundary = false;            // inner KKT point clamped to T_fb = 0

    // DigitalQam only
    std::optional<int> qam_order;
    std::optional<double> fb_bits;
    std::optional<double> feedback_error;
};

// Concave maximisation of f(t) = (1 - t/T) (R - ln(1 + theta/t)) on [t_min, T].
// Shared by open-loop TDD, the analog outer step and the separate-band w(T_fb).
struct TrainingOptimum
{
    double t = 0.0;
    double value = 0.0; // unclamped f(t)
    int iterations = 0;
};

inline double training_objective(double t, double r, double theta, double T)
{
    return (1.0 - t / T) * (r - std::log1p(theta / t));
}

inline double training_gradient(double t, double r, double theta, double T)
{
    return theta * (1.0 - t / T) / (t * t * (1.0 + theta / t)) - (r - std::log1p(theta / t)) / T;
}

inline TrainingOptimum maximize_training(double r, double theta, double T, double t_min, double tol = 1e-9)
{
    if (t_min > T)
        throw infeasible_error("training search interval is empty (T < minimum training length)");
    auto f = [&](double t) { return training_objective(t, r, theta, T); };
    auto df = [&](double t) { return training_gradient(t, r, theta, T); };
    const auto opt = maximize_by_derivative(f, df, t_min, T, tol);
    return {opt.x, opt.value, opt.iterations};
}

// 2 sqrt(theta R^ZF / T): bound on R^ZF - f(T_tr*).
inline double effective_gap_bound(double theta, double r_zf, double T)
{
    if (!(theta > 0.0) || !(r_zf > 0.0) || !(T > 0.0))
        throw std::invalid_argument("effective_gap_bound: arguments must be positive");
    return 2.0 * std::sqrt(theta * r_zf / T);
}

namespace detail
{

// Best integer neighbour of a continuous split under `objective`.
template <typename Objective>
std::pair<ResourceSplit, double> round_split(const ResourceSplit& c, Objective&& objective, double t_tr_min,
                                             double t_fb_min, double T)
{
    ResourceSplit best = c;
    double best_v = -std::numeric_limits<double>::infinity();
    const std::array<double, 2> trs{std::floor(c.t_tr), std::ceil(c.t_tr)};
    const std::array<double, 2> fbs{std::floor(c.t_fb), std::ceil(c.t_fb)};
    for (double tr : trs)
        for (double fb : fbs)
        {
            if (tr < t_tr_min || fb < t_fb_min || tr + fb > T)
                continue;
            const double v = objective(ResourceSplit{tr, fb});
            if (v > best_v)
            {
                best_v = v;
                best = {tr, fb};
            }
        }
    if (!std::isfinite(best_v))
    {
        // only reachable when T is barely above the floors
        best = {std::ceil(t_tr_min), std::ceil(t_fb_min)};
        if (best.total() > T)
            throw infeasible_error("no integer split satisfies the length floors");
        best_v = objective(best);
    }
    return {best, best_v};
}

inline double feedback_floor(const FeedbackScheme& s)
{
    return s.kind == FeedbackKind::Analog ? 1.0 : 0.0;
}

} // namespace detail

// Open-loop TDD: only (uplink) training, g = theta_tr / T_tr.
inline OptimizationResult optimize_tdd(const SystemConfig& cfg, const FeedbackScheme& scheme)
{
    cfg.validate();
    scheme.validate();
    const double T = cfg.block_len;
    if (T < cfg.n_tx)
        throw infeasible_error("optimize_tdd: block shorter than N_t");
    const double r = zf_rate_perfect_csit(cfg.n_tx, cfg.snr);
    const auto opt = maximize_training(r, scheme.theta_tr, T, cfg.n_tx);

    OptimizationResult res;
    res.continuous = {opt.t, 0.0};
    res.continuous_net_rate = std::max(0.0, opt.value);
    auto eval = [&](const ResourceSplit& s) { return net_rate(scheme, s, r, cfg.snr, cfg.n_tx, T); };
    std::tie(res.split, res.net_rate) = detail::round_split(res.continuous, eval, cfg.n_tx, 0.0, T);
    res.upper_bound_split = {std::sqrt(scheme.theta_tr * T / r), 0.0};
    res.effective_gap_bound = effective_gap_bound(scheme.theta_tr, r, T);
    res.iterations = opt.iterations;
    return res;
}

inline OptimizationResult optimize_tdd(const SystemConfig& cfg)
{
    return optimize_tdd(cfg, FeedbackScheme::tdd(cfg.n_tx));
}

// KKT split of a budget T_t minimising theta_tr/T_tr + theta_fb/T_fb:
// T_tr = sqrt(theta_tr / K) T_t, T_fb = sqrt(theta_fb / K) T_t, K = (sqrt(theta_tr) + sqrt(theta_fb))^2.
inline ResourceSplit inner_allocate_analog(double theta_tr, double theta_fb, double t_total)
{
    if (!(t_total > 0.0) || !(theta_tr > 0.0) || theta_fb < 0.0)
        throw std::invalid_argument("inner_allocate_analog: need t_total > 0, theta_tr > 0, theta_fb >= 0");
    const double a = std::sqrt(theta_tr), b = std::sqrt(theta_fb);
    return {a / (a + b) * t_total, b / (a + b) * t_total};
}

inline double analog_budget_weight(double theta_tr, double theta_fb)
{
    const double s = std::sqrt(theta_tr) + std::sqrt(theta_fb);
    return s * s;
}

inline OptimizationResult optimize_analog(const SystemConfig& cfg, const FeedbackScheme& scheme)
{
    cfg.validate();
    scheme.validate();
    const double T = cfg.block_len;
    const double kappa = analog_budget_weight(scheme.theta_tr, scheme.theta_fb);
    // T_tr >= N_t translates to T_t >= N_t sqrt(K / theta_tr)
    const double t_total_min = cfg.n_tx * std::sqrt(kappa / scheme.theta_tr);
    if (t_total_min + 1.0 > T)
        throw infeasible_error("optimize_analog: block too short for N_t training symbols plus feedback");
    const double r = zf_rate_perfect_csit(cfg.n_tx, cfg.snr);
    const auto opt = maximize_training(r, kappa, T, t_total_min);

    OptimizationResult res;
    res.continuous = inner_allocate_analog(scheme.theta_tr, scheme.theta_fb, opt.t);
    res.continuous_net_rate = std::max(0.0, opt.value);
    res.lagrange_mu = opt.t / std::sqrt(kappa);
    auto eval = [&](const ResourceSplit& s) { return net_rate(scheme, s, r, cfg.snr, cfg.n_tx, T); };
    std::tie(res.split, res.net_rate) = detail::round_split(res.continuous, eval, cfg.n_tx, 1.0, T);
    const double t_total_bound = std::sqrt(kappa * T / r);
    res.upper_bound_split = inner_allocate_analog(scheme.theta_tr, scheme.theta_fb, t_total_bound);
    res.effective_gap_bound = effective_gap_bound(kappa, r, T);
    res.iterations = opt.iterations;
    return res;
}

struct DigitalAllocation
{
    ResourceSplit split;
    double mu = 0.0;
    bool boundary = false; // KKT T_fb would be negative; clamped to (t_total, 0)
};

// KKT split of T_t minimising (N_t-1)/T_tr + rho (1+rho)^(-T_fb / (N_t(N_t-1))):
//   T_tr = mu sqrt(N_t - 1)
//   T_fb = N_t(N_t-1) (2 ln mu + ln(rho ln(1+rho) / (N_t(N_t-1)))) / ln(1+rho)
// with mu chosen so that T_tr + T_fb = T_t.
inline DigitalAllocation inner_allocate_digital(int n_tx, double snr, double t_total)
{
    if (n_tx < 2 || !(snr > 0.0) || !(t_total > 0.0))
        throw std::invalid_argument("inner_allocate_digital: need n_tx >= 2, snr > 0, t_total > 0");
    const double d = n_tx * (n_tx - 1.0);
    const double ln1p = std::log1p(snr);
    const double sq = std::sqrt(n_tx - 1.0);
    auto t_fb = [&](double mu) { return d * (2.0 * std::log(mu) + std::log(snr * ln1p / d)) / ln1p; };
    const double mu0 = std::sqrt(d / (snr * ln1p)); // T_fb(mu0) = 0
    if (t_total <= mu0 * sq)
        return {{t_total, 0.0}, t_total / sq, true};
    const auto root = bisect_increasing_root([&](double mu) { return mu * sq + t_fb(mu) - t_total; }, mu0,
                                             t_total / sq, 1e-13);
    const double mu = root.x;
    return {{mu * sq, t_total - mu * sq}, mu, false};
}

inline OptimizationResult optimize_digital_errorfree(const SystemConfig& cfg, const FeedbackScheme& scheme)
{
    cfg.validate();
    scheme.validate();
    const double T = cfg.block_len;
    if (T < cfg.n_tx)
        throw infeasible_error("optimize_digital_errorfree: block shorter than N_t");
    const double r = zf_rate_perfect_csit(cfg.n_tx, cfg.snr);
    const double n_t = cfg.n_tx;

    auto inner = [&](double t_total) {
        auto a = inner_allocate_digital(cfg.n_tx, cfg.snr, t_total);
        if (a.split.t_tr < n_t)
            a.split = {n_t, t_total - n_t};
        return a;
    };
    auto outer = [&](double t_total) {
        const auto a = inner(t_total);
        return (1.0 - t_total / T) * (r - rate_gap(gap_g(scheme, a.split, cfg.snr)));
    };
    const auto opt = scan_golden_maximize(outer, n_t, T, 64, 1e-6);
    const auto alloc = inner(opt.x);

    OptimizationResult res;
    res.continuous = alloc.split;
    res.continuous_net_rate = std::max(0.0, opt.value);
    res.lagrange_mu = alloc.mu;
    res.boundary = alloc.boundary;
    auto eval = [&](const ResourceSplit& s) { return net_rate(scheme, s, r, cfg.snr, cfg.n_tx, T); };
    std::tie(res.split, res.net_rate) = detail::round_split(res.continuous, eval, cfg.n_tx, 0.0, T);

    // T_fb expressed through T_tr at the KKT point, evaluated at the training bound.
    const double t_tr_bound = std::sqrt(scheme.theta_tr * T / r);
    const double d = n_t * (n_t - 1.0);
    const double ln1p = std::log1p(cfg.snr);
    const double t_fb_bound = std::max(
        0.0, d * (2.0 * std::log(t_tr_bound) + std::log(cfg.snr * ln1p / (d * (n_t - 1.0)))) / ln1p);
    res.upper_bound_split = {t_tr_bound, t_fb_bound};
    if (res.upper_bound_split.total() <= T)
        res.effective_gap_bound = r - net_rate(scheme, res.upper_bound_split, r, cfg.snr, cfg.n_tx, T);
    else
        res.effective_gap_bound = r;
    res.iterations = opt.iterations;
    return res;
}

// Candidate constellations for uncoded QAM feedback.
inline constexpr std::array<int, 4> qam_candidates{4, 16, 64, 256};

// Uncoded QAM feedback: a single symbol error voids the user's message.
// For each M, the inner step minimises the effective loss
//   (1 - P_e,fb) ln(1 + (N_t-1)/T_tr + rho M^(-T_fb/(N_t(N_t-1)))) + P_e,fb R^ZF
// over T_tr + T_fb = T_t; the outer step searches T_t. The best M wins.
// If scheme.fb_bits is set, B is held fixed and T_fb = B N_t / log2 M.
inline OptimizationResult optimize_digital_qam(const SystemConfig& cfg, const FeedbackScheme& scheme)
{
    cfg.validate();
    scheme.validate();
    const double T = cfg.block_len;
    const double n_t = cfg.n_tx;
    if (T < n_t)
        throw infeasible_error("optimize_digital_qam: block shorter than N_t");
    const double r = zf_rate_perfect_csit(cfg.n_tx, cfg.snr);

    std::optional<OptimizationResult> best;
    for (int m : qam_candidates)
    {
        FeedbackScheme s = scheme;
        s.qam_order = m;
        auto loss = [&](const ResourceSplit& sp) { return qam_effective_loss(s, sp, r, cfg.snr, cfg.n_tx); };
        auto eval = [&](const ResourceSplit& sp) { return net_rate(s, sp, r, cfg.snr, cfg.n_tx, T); };

        OptimizationResult res;
        if (scheme.fb_bits)
        {
            const double t_fb = qam_feedback_len(*scheme.fb_bits, m, cfg.n_tx);
            if (t_fb + n_t > T)
                continue;
            auto f = [&](double t_tr) { return (1.0 - (t_tr + t_fb) / T) * (r - loss({t_tr, t_fb})); };
            const auto opt = golden_section_maximize(f, n_t, T - t_fb, 1e-7);
            res.continuous = {opt.x, t_fb};
            res.continuous_net_rate = std::max(0.0, opt.value);
            res.iterations = opt.iterations;
            // B is fixed: only T_tr is rounded
            double best_v = -1.0;
            for (double tr : {std::floor(opt.x), std::ceil(opt.x)})
            {
                if (tr < n_t || tr + t_fb > T)
                    continue;
                const double v = eval({tr, t_fb});
                if (v > best_v)
                {
                    best_v = v;
                    res.split = {tr, t_fb};
                }
            }
            res.net_rate = std::max(best_v, 0.0);
        }
        else
        {
            int evals = 0;
            auto inner = [&](double t_total) {
                auto g = [&](double t_tr) { return -loss({t_tr, t_total - t_tr}); };
                const auto o = scan_golden_maximize(g, n_t, t_total, 32, 1e-7);
                evals += o.iterations;
                return o;
            };
            auto outer = [&](double t_total) { return (1.0 - t_total / T) * (r + inner(t_total).value); };
            const auto opt = scan_golden_maximize(outer, n_t, T, 64, 1e-6);
            const auto in = inner(opt.x);
            res.continuous = {in.x, opt.x - in.x};
            res.continuous_net_rate = std::max(0.0, opt.value);
            res.iterations = opt.iterations;
            std::tie(res.split, res.net_rate) = detail::round_split(res.continuous, eval, n_t, 0.0, T);
        }
        res.qam_order = m;
        res.fb_bits = qam_feedback_bits(res.split.t_fb, m, cfg.n_tx);
        res.feedback_error = feedback_error_prob(qam_symbol_error(m, cfg.snr), res.split.t_fb, cfg.n_tx);
        if (!best || res.net_rate > best->net_rate)
            best = res;
    }
    if (!best)
        throw infeasible_error("optimize_digital_qam: no constellation admits a feasible split");

    FeedbackScheme s = scheme;
    s.qam_order = *best->qam_order;
    best->upper_bound_split = {std::sqrt(scheme.theta_tr * T / r), best->split.t_fb};
    if (best->upper_bound_split.total() <= T)
        best->effective_gap_bound = r - net_rate(s, best->upper_bound_split, r, cfg.snr, cfg.n_tx, T);
    else
        best->effective_gap_bound = r;
    return *best;
}

inline OptimizationResult optimize(const SystemConfig& cfg, const FeedbackScheme& scheme)
{
    switch (scheme.kind)
    {
    case FeedbackKind::TddOpenLoop:
        return optimize_tdd(cfg, scheme);
    case FeedbackKind::Analog:
        return optimize_analog(cfg, scheme);
    case FeedbackKind::DigitalErrorFree:
        return optimize_digital_errorfree(cfg, scheme);
    case FeedbackKind::DigitalQam:
        return optimize_digital_qam(cfg, scheme);
    }
    throw std::invalid_argument("optimize: unknown scheme");
}

} // namespace csitopt

#endif
