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

#ifndef CSITOPT_DOPPLER_HPP
#define CSITOPT_DOPPLER_HPP

// Temporally correlated block fading with a band-limited Doppler spectrum.
// Pilots from past blocks feed a linear predictor (d = 1) or filter (d = 0);
// the residual error replaces the block-by-block estimation error.

#include "joint.hpp"
#include "parallel.hpp"
#include "rates.hpp"
#include "scalar_search.hpp"
#include "tradeoff.hpp"
#include "types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace csitopt
{

inline constexpr double speed_of_light = 2.998e8; // m/s
inline constexpr double default_carrier = 2e9;    // Hz

inline double kmh_to_mps(double kmh) { return kmh / 3.6; }

// F = v f_c T_f / c.
inline double doppler_shift(double speed_mps, double carrier_hz, double block_time_s)
{
    if (speed_mps < 0.0 || carrier_hz <= 0.0 || block_time_s <= 0.0)
        throw std::invalid_argument("doppler_shift: speed must be >= 0, carrier and block time > 0");
    const double f = speed_mps * carrier_hz * block_time_s / speed_of_light;
    if (f >= 0.5)
        throw std::domain_error("doppler_shift: normalized shift must stay below 1/2");
    return f;
}

inline double doppler_shift_kmh(double speed_kmh, double carrier_hz = default_carrier, double block_time_s = 1e-3)
{
    return doppler_shift(kmh_to_mps(speed_kmh), carrier_hz, block_time_s);
}

// Unit-power Doppler spectrum supported on [-F, F].
class DopplerSpectrum
{
public:
    enum class Shape
    {
        Uniform,
        Tabulated
    };

    static DopplerSpectrum uniform(double shift)
    {
        check_shift(shift);
        DopplerSpectrum s;
        s.shift_ = shift;
        return s;
    }

    // Samples of S_h on an equispaced grid spanning [-F, F], endpoints included.
    static DopplerSpectrum tabulated(double shift, std::vector<double> samples, double norm_tol = 1e-3)
    {
        check_shift(shift);
        if (shift == 0.0)
            throw std::invalid_argument("tabulated spectrum needs a positive shift");
        if (samples.size() < 3)
            throw std::invalid_argument("tabulated spectrum needs at least 3 samples");
        for (double v : samples)
            if (!(v > 0.0) || !std::isfinite(v))
                throw std::invalid_argument("tabulated spectrum: samples must be finite and positive on the support");
        DopplerSpectrum s;
        s.shape_ = Shape::Tabulated;
        s.shift_ = shift;
        s.samples_ = std::move(samples);
        const double mass = s.trapezoid([](double v) { return v; });
        if (std::abs(mass - 1.0) > norm_tol)
            throw std::invalid_argument("tabulated spectrum is not normalized to unit power");
        return s;
    }

    template <typename Fn>
    static DopplerSpectrum from_function(double shift, Fn&& density, std::size_t points = 4096, double norm_tol = 1e-3)
    {
        if (points < 3)
            throw std::invalid_argument("from_function: need at least 3 points");
        std::vector<double> v(points);
        for (std::size_t i = 0; i < points; ++i)
            v[i] = density(-shift + 2.0 * shift * double(i) / double(points - 1));
        return tabulated(shift, std::move(v), norm_tol);
    }

    Shape shape() const { return shape_; }
    double shift() const { return shift_; }
    std::span<const double> samples() const { return samples_; }

    // Integral over the support of ln(1 + S_h / delta).
    double log_gain_integral(double delta) const
    {
        if (!(delta > 0.0))
            throw std::invalid_argument("log_gain_integral: delta must be positive");
        if (shift_ == 0.0)
            return 0.0;
        if (shape_ == Shape::Uniform)
            return 2.0 * shift_ * std::log1p(1.0 / (2.0 * shift_ * delta));
        return trapezoid([delta](double v) { return std::log1p(v / delta); });
    }

private:
    static void check_shift(double shift)
    {
        if (!(shift >= 0.0 && shift < 0.5))
            throw std::domain_error("Doppler shift must lie in [0, 1/2)");
    }

    template <typename G>
    double trapezoid(G&& g) const
    {
        const std::size_t n = samples_.size();
        const double h = 2.0 * shift_ / double(n - 1);
        double sum = 0.5 * (g(samples_.front()) + g(samples_.back()));
        for (std::size_t i = 1; i + 1 < n; ++i)
            sum += g(samples_[i]);
        return h * sum;
    }

    Shape shape_ = Shape::Uniform;
    double shift_ = 0.0;
    std::vector<double> samples_;
};

struct DopplerModel
{
    double speed = 0.0;                // m/s
    double carrier = default_carrier;  // Hz
    double block_time = 1e-3;          // s
    DopplerSpectrum spectrum = DopplerSpectrum::uniform(0.0);
    int delay = 1;                     // 0: filtering, 1: one-step prediction

    static DopplerModel uniform(double speed_mps, double carrier_hz = default_carrier, double block_time_s = 1e-3,
                                int delay = 1)
    {
        DopplerModel m;
        m.speed = speed_mps;
        m.carrier = carrier_hz;
        m.block_time = block_time_s;
        m.spectrum = DopplerSpectrum::uniform(doppler_shift(speed_mps, carrier_hz, block_time_s));
        m.delay = delay;
        m.validate();
        return m;
    }

    static DopplerModel uniform_kmh(double speed_kmh, double carrier_hz = default_carrier, double block_time_s = 1e-3,
                                    int delay = 1)
    {
        return uniform(kmh_to_mps(speed_kmh), carrier_hz, block_time_s, delay);
    }

    double shift() const { return spectrum.shift(); }

    void validate() const
    {
        if (delay != 0 && delay != 1)
            throw std::invalid_argument("DopplerModel: only delays 0 and 1 are supported");
        if (!(shift() < 0.5))
            throw std::domain_error("DopplerModel: shift must be below 1/2");
    }
};

// delta = N_t / (T_tr rho): per-coefficient pilot noise after matched filtering.
inline double observation_noise(int n_tx, double t_tr, double snr)
{
    if (!(t_tr > 0.0) || !(snr > 0.0))
        throw std::invalid_argument("observation_noise: t_tr and snr must be positive");
    return n_tx / (t_tr * snr);
}

// One-step prediction MMSE eps_1 = exp(int ln(delta + S)) - delta over the unit band.
inline double prediction_mmse(const DopplerSpectrum& s, double delta)
{
    return delta * std::expm1(s.log_gain_integral(delta));
}

inline double prediction_mmse(const DopplerModel& m, double delta) { return prediction_mmse(m.spectrum, delta); }

// eps_0 = delta eps_1 / (delta + eps_1).
inline double filtering_mmse(double delta, double eps1)
{
    if (!(delta > 0.0) || eps1 < 0.0)
        throw std::invalid_argument("filtering_mmse: delta must be positive, eps1 non-negative");
    if (std::isinf(eps1))
        return delta;
    return delta * eps1 / (delta + eps1);
}

enum class GapForm
{
    Bound, // uniform-spectrum upper bounds on eps_d / delta
    Exact  // eps_d / delta from the MMSE itself
};

// Multiplier on (N_t - 1)/T_tr in the gap: eps_d(delta)/delta or its uniform-spectrum bound.
inline double training_error_ratio(const DopplerModel& m, double t_tr, double snr, int n_tx, GapForm form)
{
    m.validate();
    const double f = m.shift();
    const double delta = observation_noise(n_tx, t_tr, snr);
    if (form == GapForm::Bound)
    {
        if (m.spectrum.shape() != DopplerSpectrum::Shape::Uniform)
            throw std::invalid_argument("training_error_ratio: bound form needs a uniform spectrum");
        // (1 / (2 F delta))^(2F), evaluated in log space; tends to 1 as F -> 0.
        const double x = f > 0.0 ? std::exp(-2.0 * f * std::log(2.0 * f * delta)) : 1.0;
        return m.delay == 1 ? x : 1.0 / (1.0 + 1.0 / x);
    }
    const double e1 = prediction_mmse(m, delta);
    return m.delay == 1 ? e1 / delta : filtering_mmse(delta, e1) / delta;
}

// ln(1 + (N_t-1)/T_tr * eps_d/delta + Delta).
inline double delayed_rate_gap(const DopplerModel& m, double t_tr, double feedback_delta, double snr, int n_tx,
                               GapForm form = GapForm::Bound)
{
    if (t_tr < n_tx)
        throw std::invalid_argument("delayed_rate_gap: t_tr must be at least N_t");
    return std::log1p((n_tx - 1.0) / t_tr * training_error_ratio(m, t_tr, snr, n_tx, form) + feedback_delta);
}

inline double delayed_rate_gap(const DopplerModel& m, const ResourceSplit& split, double snr, int n_tx,
                               const FeedbackScheme& scheme, GapForm form = GapForm::Bound)
{
    const double delta = feedback_loss(scheme.kind, split.t_fb, n_tx, snr, n_tx, scheme.qam_order);
    return delayed_rate_gap(m, split.t_tr, delta, snr, n_tx, form);
}

// kappa = (N_t - 1) (rho / (2 F N_t))^(2F); N_t - 1 at F = 0.
inline double prediction_kappa(int n_tx, double snr, double shift)
{
    if (shift == 0.0)
        return n_tx - 1.0;
    return (n_tx - 1.0) * std::exp(2.0 * shift * (std::log(snr) - std::log(2.0 * shift * n_tx)));
}

struct PredictionOptimum
{
    OptimizationResult result;    // split.t_fb is the given feedback length
    double w = 0.0;               // net nats/use/user at the rounded split
    double closed_form_t_tr = 0.0; // (kappa T / R)^(1/(2-F))
    double t_tr_bound = 0.0;       // same with R -> R - ln(1+Delta), kappa -> kappa / (1+Delta)
    double kappa = 0.0;
};

// max_{N_t <= T_tr <= T} (1 - T_tr/T) (R - gap(T_tr)) for a fixed feedback length.
inline PredictionOptimum optimize_training_prediction(const SystemConfig& cfg, const DopplerModel& m,
                                                      const FeedbackScheme& scheme, double t_fb,
                                                      GapForm form = GapForm::Bound)
{
    cfg.validate();
    m.validate();
    const double T = cfg.block_len;
    if (T < cfg.n_tx)
        throw infeasible_error("optimize_training_prediction: block shorter than N_t");
    const double r = zf_rate_perfect_csit(cfg.n_tx, cfg.snr);
    const double delta = feedback_loss(scheme.kind, t_fb, cfg.n_tx, cfg.snr, cfg.n_tx, scheme.qam_order);
    const double pe = scheme.kind == FeedbackKind::DigitalQam
                          ? feedback_error_prob(qam_symbol_error(scheme.qam_order, cfg.snr), t_fb, cfg.n_tx)
                          : 0.0;
    auto f = [&](double t) {
        if (!std::isfinite(delta))
            return 0.0;
        return (1.0 - t / T) * (r - delayed_rate_gap(m, t, delta, cfg.snr, cfg.n_tx, form));
    };
    const auto opt = golden_section_maximize(f, cfg.n_tx, T, 1e-9);

    PredictionOptimum out;
    out.kappa = prediction_kappa(cfg.n_tx, cfg.snr, m.shift());
    const double expo = 1.0 / (2.0 - m.shift());
    out.closed_form_t_tr = std::pow(out.kappa * T / r, expo);
    const double r_eff = r - std::log1p(delta);
    out.t_tr_bound = r_eff > 0.0 ? std::pow(out.kappa * T / ((1.0 + delta) * r_eff), expo)
                                 : std::numeric_limits<double>::infinity();

    auto& res = out.result;
    res.continuous = {opt.x, t_fb};
    res.continuous_net_rate = std::max(0.0, opt.value) * (1.0 - pe);
    double best_t = opt.x, best_v = -std::numeric_limits<double>::infinity();
    for (double t : {std::floor(opt.x), std::ceil(opt.x)})
    {
        if (t < cfg.n_tx || t > T)
            continue;
        const double v = f(t);
        if (v > best_v)
        {
            best_v = v;
            best_t = t;
        }
    }
    res.split = {best_t, t_fb};
    res.net_rate = out.w = std::max(0.0, best_v) * (1.0 - pe);
    res.upper_bound_split = {out.t_tr_bound, t_fb};
    res.effective_gap_bound = r - res.continuous_net_rate;
    res.iterations = opt.iterations;
    if (scheme.kind == FeedbackKind::DigitalQam)
    {
        res.qam_order = scheme.qam_order;
        res.feedback_error = pe;
    }
    return out;
}

// Weight of Delta in the prediction-based separable bound, at the closed-form training length.
inline double prediction_r_factor(const SystemConfig& cfg, const DopplerModel& m)
{
    const double T = cfg.block_len;
    const double r = zf_rate_perfect_csit(cfg.n_tx, cfg.snr);
    const double kappa = prediction_kappa(cfg.n_tx, cfg.snr, m.shift());
    const double t_tr = std::clamp(std::pow(kappa * T / r, 1.0 / (2.0 - m.shift())), double(cfg.n_tx), T);
    return (1.0 - t_tr / T) / (1.0 + kappa * std::pow(t_tr, 2.0 * m.shift() - 1.0));
}

// R - (T_tr/T R + kappa T_tr^(2F-1)) - r' Delta at the closed-form training length.
inline double prediction_w_lower_bound(const SystemConfig& cfg, const DopplerModel& m, const FeedbackScheme& scheme,
                                       double t_fb)
{
    const double T = cfg.block_len;
    const double r = zf_rate_perfect_csit(cfg.n_tx, cfg.snr);
    const double kappa = prediction_kappa(cfg.n_tx, cfg.snr, m.shift());
    const double t_tr = std::clamp(std::pow(kappa * T / r, 1.0 / (2.0 - m.shift())), double(cfg.n_tx), T);
    const double delta = feedback_loss(scheme.kind, t_fb, cfg.n_tx, cfg.snr, cfg.n_tx, scheme.qam_order);
    double bound = r - (t_tr / T * r + kappa * std::pow(t_tr, 2.0 * m.shift() - 1.0)) -
                   prediction_r_factor(cfg, m) * delta;
    if (scheme.kind == FeedbackKind::DigitalQam)
        bound *= 1.0 - feedback_error_prob(qam_symbol_error(scheme.qam_order, cfg.snr), t_fb, cfg.n_tx);
    return bound;
}

// Frame-based rates: bandwidth W_f, frame duration T_f.
inline double frame_uplink_rate_bps(const SystemConfig& cfg, double t_fb)
{
    return sum_rate_bps(cfg.uplink_eff, cfg.uplink_bw - t_fb / cfg.block_time, cfg.n_tx);
}

inline double frame_max_feedback_len(const SystemConfig& cfg)
{
    return std::min(cfg.block_len, cfg.uplink_bw * cfg.block_time);
}

inline ParetoPoint delayed_pareto_point(const SystemConfig& cfg, const DopplerModel& m, const FeedbackScheme& scheme,
                                        double lambda, double t_fb)
{
    const auto opt = optimize_training_prediction(cfg, m, scheme, t_fb);
    ParetoPoint p;
    p.lambda = lambda;
    p.t_fb = t_fb;
    p.t_tr = opt.result.split.t_tr;
    p.r_down_bps = sum_rate_bps(opt.w, cfg.block_bw, cfg.n_tx);
    p.r_up_bps = frame_uplink_rate_bps(cfg, t_fb);
    p.r_factor = prediction_r_factor(cfg, m);
    return p;
}

// Pareto boundary under delayed CSIT. Closed-form T_fb reuses the model-2 forms with the
// prediction r factor; the two search paths mirror pareto_boundary.
inline ParetoBoundary delayed_pareto(const SystemConfig& cfg, const DopplerModel& m, const FeedbackScheme& scheme,
                                     std::span<const double> lambda_grid)
{
    cfg.validate();
    m.validate();
    detail::check_lambda_grid(lambda_grid);
    const double r_pred = prediction_r_factor(cfg, m);
    const double cap = frame_max_feedback_len(cfg);
    const double t_min = detail::feedback_floor(scheme);
    auto search = [&](double lambda, auto&& down) {
        double best_t = t_min, best_v = -std::numeric_limits<double>::infinity();
        for (double t = t_min; t <= std::floor(cap); t += 1.0)
        {
            const double v = lambda * down(t) + (1.0 - lambda) * frame_uplink_rate_bps(cfg, t);
            if (v > best_v)
            {
                best_v = v;
                best_t = t;
            }
        }
        return best_t;
    };
    auto bound_down = [&](double t) {
        return sum_rate_bps(prediction_w_lower_bound(cfg, m, scheme, t), cfg.block_bw, cfg.n_tx);
    };
    auto exact_down = [&](double t) {
        return sum_rate_bps(optimize_training_prediction(cfg, m, scheme, t).w, cfg.block_bw, cfg.n_tx);
    };

    ParetoBoundary out;
    out.closed_form.resize(lambda_grid.size());
    out.numeric.resize(lambda_grid.size());
    out.exact.resize(lambda_grid.size());
    parallel_for(lambda_grid.size(), [&](std::size_t i) {
        const double lambda = lambda_grid[i];
        const double t_cf = std::max(t_min, std::round(tfb_closed_form(scheme.kind, r_pred, cfg.n_tx, cfg.snr,
                                                                       cfg.block_len, cfg.uplink_eff, lambda, cap,
                                                                       scheme.qam_order)));
        out.closed_form[i] = delayed_pareto_point(cfg, m, scheme, lambda, t_cf);
        out.numeric[i] = delayed_pareto_point(cfg, m, scheme, lambda, search(lambda, bound_down));
        out.exact[i] = delayed_pareto_point(cfg, m, scheme, lambda, search(lambda, exact_down));
    });
    detail::sort_by_feedback(out.closed_form);
    detail::sort_by_feedback(out.numeric);
    detail::sort_by_feedback(out.exact);
    return out;
}

struct SpeedRow
{
    double speed_kmh = 0.0;
    double shift = 0.0;
    double t_tr = 0.0;
    double w = 0.0;            // nats/use/user
    double sum_rate_bps = 0.0; // N_t W_f w / ln 2
};

// Downlink sum rate versus mobile speed at a fixed feedback length (one-step prediction).
inline std::vector<SpeedRow> rate_vs_speed(const SystemConfig& cfg, const FeedbackScheme& scheme, double t_fb,
                                           std::span<const double> speeds_kmh, double carrier_hz = default_carrier)
{
    cfg.validate();
    std::vector<SpeedRow> rows(speeds_kmh.size());
    parallel_for(speeds_kmh.size(), [&](std::size_t i) {
        const auto m = DopplerModel::uniform_kmh(speeds_kmh[i], carrier_hz, cfg.block_time, 1);
        const auto opt = optimize_training_prediction(cfg, m, scheme, t_fb);
        rows[i] = {speeds_kmh[i], m.shift(), opt.result.split.t_tr, opt.w, sum_rate_bps(opt.w, cfg.block_bw, cfg.n_tx)};
    });
    return rows;
}

} // namespace csitopt

#endif
