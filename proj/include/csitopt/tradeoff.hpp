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

#ifndef CSITOPT_TRADEOFF_HPP
#define CSITOPT_TRADEOFF_HPP

// Separate uplink and downlink bands: feedback spends uplink channel uses,
// training spends downlink ones. w(T_fb) is the downlink spectral efficiency
// after optimising the training length for a given feedback length, and the
// weighted sum lambda R_down + (1 - lambda) R_up traces the Pareto boundary.

#include "joint.hpp"
#include "parallel.hpp"
#include "rates.hpp"
#include "types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace csitopt
{

// Rate loss Delta(T_fb) added inside the gap by imperfect feedback.
//   analog:  N_t (N_t - 1) / T_fb
//   digital: rho (1 + rho)^(-T_fb / (K (N_t - 1)))
//   QAM:     rho M^(-T_fb / (K (N_t - 1)))
// `users` is the number of users sharing the feedback symbols (K; defaults to N_t).
inline double feedback_loss(FeedbackKind kind, double t_fb, int n_tx, double snr, int users = 0, int qam_order = 4)
{
    if (t_fb < 0.0)
        throw std::invalid_argument("feedback_loss: t_fb must be non-negative");
    const double k = users > 0 ? users : n_tx;
    switch (kind)
    {
    case FeedbackKind::TddOpenLoop:
        return 0.0;
    case FeedbackKind::Analog:
        return t_fb > 0.0 ? n_tx * (n_tx - 1.0) / t_fb : std::numeric_limits<double>::infinity();
    case FeedbackKind::DigitalErrorFree:
        return snr * std::exp(-t_fb / (k * (n_tx - 1.0)) * std::log1p(snr));
    case FeedbackKind::DigitalQam:
        return snr * std::exp(-t_fb / (k * (n_tx - 1.0)) * std::log(double(qam_order)));
    }
    return 0.0;
}

struct SeparateBandRate
{
    double w = 0.0;           // nats/use/user, clamped at 0
    double t_tr = 0.0;        // continuous optimum
    double t_tr_rounded = 0.0;
    double t_tr_bound = 0.0;  // sqrt((N_t-1) T / ((R - ln(1+D))(1+D)))
    int iterations = 0;
};

// max_{N_t <= T_tr <= T} (1 - T_tr/T) (R - ln(1 + (N_t-1)/T_tr + D)).
// Rewritten as the open-loop TDD problem with R -> R - ln(1+D) and N_t-1 -> (N_t-1)/(1+D).
inline SeparateBandRate separate_band_rate(double r_zf, int n_tx, double delta, double T)
{
    if (T < n_tx)
        throw infeasible_error("separate_band_rate: block shorter than N_t");
    SeparateBandRate out;
    if (!std::isfinite(delta))
    {
        out.t_tr = out.t_tr_rounded = n_tx;
        return out;
    }
    const double r_eff = r_zf - std::log1p(delta);
    const double theta_eff = (n_tx - 1.0) / (1.0 + delta);
    const auto opt = maximize_training(r_eff, theta_eff, T, n_tx);
    out.t_tr = opt.t;
    out.w = std::max(0.0, opt.value);
    out.iterations = opt.iterations;
    double best = -std::numeric_limits<double>::infinity();
    for (double t : {std::floor(opt.t), std::ceil(opt.t)})
    {
        if (t < n_tx || t > T)
            continue;
        const double v = training_objective(t, r_eff, theta_eff, T);
        if (v > best)
        {
            best = v;
            out.t_tr_rounded = t;
        }
    }
    out.t_tr_bound = r_eff > 0.0 ? std::sqrt((n_tx - 1.0) * T / (r_eff * (1.0 + delta)))
                                 : std::numeric_limits<double>::infinity();
    return out;
}

// w(T_fb) for K = N_t users. DigitalQam multiplies by the message success probability.
inline SeparateBandRate w_of_tfb(const SystemConfig& cfg, const FeedbackScheme& scheme, double t_fb)
{
    cfg.validate();
    const double r = zf_rate_perfect_csit(cfg.n_tx, cfg.snr);
    const double delta = feedback_loss(scheme.kind, t_fb, cfg.n_tx, cfg.snr, cfg.n_tx, scheme.qam_order);
    auto out = separate_band_rate(r, cfg.n_tx, delta, cfg.block_len);
    if (scheme.kind == FeedbackKind::DigitalQam)
        out.w *= 1.0 - feedback_error_prob(qam_symbol_error(scheme.qam_order, cfg.snr), t_fb, cfg.n_tx);
    return out;
}

// r = (1 - sqrt((N_t-1)/(T R))) / (1 + sqrt(R (N_t-1)/T)); weight of Delta in the separable bound.
inline double r_factor(double r_zf, int n_tx, double T)
{
    return (1.0 - std::sqrt((n_tx - 1.0) / (T * r_zf))) / (1.0 + std::sqrt(r_zf * (n_tx - 1.0) / T));
}

// Separable lower bound R - 2 sqrt(R (N_t-1)/T) - r Delta(T_fb) on w(T_fb).
inline double w_lower_bound(const SystemConfig& cfg, const FeedbackScheme& scheme, double t_fb)
{
    cfg.validate();
    const double T = cfg.block_len;
    const double r = zf_rate_perfect_csit(cfg.n_tx, cfg.snr);
    const double delta = feedback_loss(scheme.kind, t_fb, cfg.n_tx, cfg.snr, cfg.n_tx, scheme.qam_order);
    double bound = r - 2.0 * std::sqrt(r * (cfg.n_tx - 1.0) / T) - r_factor(r, cfg.n_tx, T) * delta;
    if (scheme.kind == FeedbackKind::DigitalQam)
        bound *= 1.0 - feedback_error_prob(qam_symbol_error(scheme.qam_order, cfg.snr), t_fb, cfg.n_tx);
    return bound;
}

// Tighter first step of the same chain: w evaluated at T_tr = sqrt((N_t-1) T / R).
inline double w_lower_bound_at_training_bound(const SystemConfig& cfg, const FeedbackScheme& scheme, double t_fb)
{
    const double T = cfg.block_len;
    const double r = zf_rate_perfect_csit(cfg.n_tx, cfg.snr);
    const double delta = feedback_loss(scheme.kind, t_fb, cfg.n_tx, cfg.snr, cfg.n_tx, scheme.qam_order);
    return (1.0 - std::sqrt((cfg.n_tx - 1.0) / (T * r))) *
           (r - std::log1p(std::sqrt(r * (cfg.n_tx - 1.0) / T) + delta));
}

// Largest useful feedback length: min(T, W_up T_c).
inline double max_feedback_len(const SystemConfig& cfg)
{
    return std::min(cfg.block_len, cfg.uplink_bw * cfg.coherence_time);
}

// Stationary point of lambda W_c w(T_fb) - (1-lambda) (T_fb / T_c) C_up using the separable bound:
//   analog:  sqrt(r N_t(N_t-1) T lambda / (C_up (1-lambda)))
//   digital: N_t(N_t-1)/ln(1+rho) ln(r rho ln(1+rho) T lambda / (N_t(N_t-1) C_up (1-lambda)))
// QAM uses the digital form with ln M in place of ln(1+rho). Clamped to [0, cap].
inline double tfb_closed_form(FeedbackKind kind, double r, int n_tx, double snr, double T, double c_up,
                              double lambda, double cap, int qam_order = 4)
{
    if (!(lambda > 0.0 && lambda < 1.0))
        throw std::invalid_argument("tfb_of_lambda: lambda must lie in (0, 1)");
    const double d = n_tx * (n_tx - 1.0);
    const double odds = lambda / (1.0 - lambda);
    double t_fb = 0.0;
    switch (kind)
    {
    case FeedbackKind::TddOpenLoop:
        t_fb = 0.0;
        break;
    case FeedbackKind::Analog:
        t_fb = std::sqrt(r * d * T * odds / c_up);
        break;
    case FeedbackKind::DigitalErrorFree:
    case FeedbackKind::DigitalQam: {
        const double ln_m = kind == FeedbackKind::DigitalQam ? std::log(double(qam_order)) : std::log1p(snr);
        t_fb = d / ln_m * std::log(r * snr * ln_m * T * odds / (d * c_up));
        break;
    }
    }
    return std::clamp(t_fb, 0.0, cap);
}

inline double tfb_of_lambda(const SystemConfig& cfg, const FeedbackScheme& scheme, double lambda)
{
    cfg.validate();
    const double r_zf = zf_rate_perfect_csit(cfg.n_tx, cfg.snr);
    return tfb_closed_form(scheme.kind, r_factor(r_zf, cfg.n_tx, cfg.block_len), cfg.n_tx, cfg.snr,
                           cfg.block_len, cfg.uplink_eff, lambda, max_feedback_len(cfg), scheme.qam_order);
}

struct ParetoPoint
{
    double lambda = 0.0;
    double t_fb = 0.0;
    double t_tr = 0.0;
    double r_down_bps = 0.0; // N_t W w(T_fb) / ln 2
    double r_up_bps = 0.0;   // N_t (W_up - T_fb/T_c) C_up / ln 2
    double r_factor = 0.0;
};

struct ParetoBoundary
{
    std::vector<ParetoPoint> closed_form; // T_fb from the stationarity condition, rounded
    std::vector<ParetoPoint> numeric;     // T_fb from integer search of the bound-based weighted sum
    std::vector<ParetoPoint> exact;       // T_fb from integer search with the exact w(T_fb)
};

// Uplink data rate left after feedback, summed over N_t uplink users [bit/s].
inline double uplink_rate_bps(const SystemConfig& cfg, double t_fb)
{
    return sum_rate_bps(cfg.uplink_eff, cfg.uplink_bw - t_fb / cfg.coherence_time, cfg.n_tx);
}

namespace detail
{

// Integer T_fb maximising lambda * R_down + (1 - lambda) * R_up for a given downlink-rate map.
template <typename DownRate>
double weighted_sum_tfb(DownRate&& down_bps, const SystemConfig& cfg, double lambda, double t_fb_min)
{
    const double cap = std::floor(max_feedback_len(cfg));
    double best_t = t_fb_min, best_v = -std::numeric_limits<double>::infinity();
    for (double t = t_fb_min; t <= cap; t += 1.0)
    {
        const double v = lambda * down_bps(t) + (1.0 - lambda) * uplink_rate_bps(cfg, t);
        if (v > best_v)
        {
            best_v = v;
            best_t = t;
        }
    }
    return best_t;
}

inline void sort_by_feedback(std::vector<ParetoPoint>& pts)
{
    std::stable_sort(pts.begin(), pts.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
        return a.t_fb < b.t_fb || (a.t_fb == b.t_fb && a.lambda < b.lambda);
    });
}

inline void check_lambda_grid(std::span<const double> grid)
{
    for (double l : grid)
        if (!(l > 0.0 && l < 1.0))
            throw std::invalid_argument("lambda grid must lie in (0, 1)");
}

} // namespace detail

inline ParetoPoint pareto_point(const SystemConfig& cfg, const FeedbackScheme& scheme, double lambda, double t_fb)
{
    const double r_zf = zf_rate_perfect_csit(cfg.n_tx, cfg.snr);
    const auto w = w_of_tfb(cfg, scheme, t_fb);
    ParetoPoint p;
    p.lambda = lambda;
    p.t_fb = t_fb;
    p.t_tr = w.t_tr_rounded;
    p.r_down_bps = sum_rate_bps(w.w, cfg.coherence_bw, cfg.n_tx);
    p.r_up_bps = uplink_rate_bps(cfg, t_fb);
    p.r_factor = r_factor(r_zf, cfg.n_tx, cfg.block_len);
    return p;
}

// Integer T_fb maximising the weighted sum with R_down taken from the separable lower bound.
// This is the objective whose stationary point tfb_of_lambda solves.
inline double tfb_of_lambda_numeric(const SystemConfig& cfg, const FeedbackScheme& scheme, double lambda)
{
    cfg.validate();
    const double t_min = detail::feedback_floor(scheme);
    auto down = [&](double t) { return sum_rate_bps(w_lower_bound(cfg, scheme, t), cfg.coherence_bw, cfg.n_tx); };
    return detail::weighted_sum_tfb(down, cfg, lambda, t_min);
}

// Integer T_fb maximising the weighted sum with the exact w(T_fb).
inline double tfb_of_lambda_exact(const SystemConfig& cfg, const FeedbackScheme& scheme, double lambda)
{
    cfg.validate();
    const double t_min = detail::feedback_floor(scheme);
    auto down = [&](double t) { return sum_rate_bps(w_of_tfb(cfg, scheme, t).w, cfg.coherence_bw, cfg.n_tx); };
    return detail::weighted_sum_tfb(down, cfg, lambda, t_min);
}

inline ParetoBoundary pareto_boundary(const SystemConfig& cfg, const FeedbackScheme& scheme,
                                      std::span<const double> lambda_grid)
{
    cfg.validate();
    detail::check_lambda_grid(lambda_grid);
    ParetoBoundary out;
    out.closed_form.resize(lambda_grid.size());
    out.numeric.resize(lambda_grid.size());
    out.exact.resize(lambda_grid.size());
    const double t_min = detail::feedback_floor(scheme);
    parallel_for(lambda_grid.size(), [&](std::size_t i) {
        const double lambda = lambda_grid[i];
        const double t_cf = std::max(t_min, std::round(tfb_of_lambda(cfg, scheme, lambda)));
        out.closed_form[i] = pareto_point(cfg, scheme, lambda, t_cf);
        out.numeric[i] = pareto_point(cfg, scheme, lambda, tfb_of_lambda_numeric(cfg, scheme, lambda));
        out.exact[i] = pareto_point(cfg, scheme, lambda, tfb_of_lambda_exact(cfg, scheme, lambda));
    });
    detail::sort_by_feedback(out.closed_form);
    detail::sort_by_feedback(out.numeric);
    detail::sort_by_feedback(out.exact);
    return out;
}

} // namespace csitopt

#endif
