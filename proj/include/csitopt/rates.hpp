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

#ifndef CSITOPT_RATES_HPP
#define CSITOPT_RATES_HPP

// Closed-form rate, rate-gap and feedback-error expressions for ZF beamforming
// with N_t antennas and K = N_t single-antenna users. Natural log throughout.

#include "special.hpp"
#include "types.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace csitopt
{

// Per-user ergodic ZF rate with perfect CSIT and equal power rho/N_t.
// The useful gain |h_k^H v_k|^2 is Exp(1), so R = E[ln(1 + rho/N_t X)] = e^{N_t/rho} E1(N_t/rho).
inline double zf_rate_perfect_csit(int n_tx, double snr)
{
    if (n_tx < 1)
        throw std::invalid_argument("zf_rate_perfect_csit: n_tx must be positive");
    if (snr < 0.0)
        throw std::invalid_argument("zf_rate_perfect_csit: snr must be non-negative");
    if (snr == 0.0)
        return 0.0;
    return scaled_exp_integral_e1(n_tx / snr);
}

// Interference-to-noise scaling g(T_tr, T_fb); the rate gap is ln(1 + g).
//   TDD:      theta_tr / T_tr
//   analog:   theta_tr / T_tr + theta_fb / T_fb
//   digital:  theta_tr / T_tr + rho (1 + rho)^(-T_fb / theta_fb)
//   QAM:      theta_tr / T_tr + rho M^(-T_fb / theta_fb)
// For the digital kinds theta_fb is the exponent divisor N_t (N_t - 1).
inline double gap_g(const FeedbackScheme& scheme, const ResourceSplit& split, double snr)
{
    if (!(split.t_tr > 0.0))
        throw std::invalid_argument("gap_g: t_tr must be positive");
    if (split.t_fb < 0.0)
        throw std::invalid_argument("gap_g: t_fb must be non-negative");
    const double training = scheme.theta_tr / split.t_tr;
    switch (scheme.kind)
    {
    case FeedbackKind::TddOpenLoop:
        return training;
    case FeedbackKind::Analog:
        if (!(split.t_fb > 0.0))
            throw std::invalid_argument("gap_g: analog feedback needs t_fb > 0");
        return training + scheme.theta_fb / split.t_fb;
    case FeedbackKind::DigitalErrorFree:
        return training + snr * std::exp(-split.t_fb / scheme.theta_fb * std::log1p(snr));
    case FeedbackKind::DigitalQam:
        return training + snr * std::exp(-split.t_fb / scheme.theta_fb * std::log(double(scheme.qam_order)));
    }
    return training;
}

inline double rate_gap(double g)
{
    if (g < 0.0)
        throw std::invalid_argument("rate_gap: g must be non-negative");
    return std::log1p(g);
}

// (1 - T_overhead / T) * max(0, R^ZF - gap).
inline double net_spectral_efficiency(double r_zf, double gap_nats, double t_overhead, double block_len)
{
    if (t_overhead < 0.0 || t_overhead > block_len)
        throw std::invalid_argument("net_spectral_efficiency: overhead must lie in [0, T]");
    return (1.0 - t_overhead / block_len) * std::max(0.0, r_zf - gap_nats);
}

// Uncoded square M-QAM symbol error probability at SNR rho.
inline double qam_symbol_error(int m, double snr)
{
    if (!is_square_qam(m))
        throw std::invalid_argument("qam_symbol_error: M must be a square QAM size (power of 4)");
    if (!(snr > 0.0))
        throw std::invalid_argument("qam_symbol_error: snr must be positive");
    const double q = q_function(std::sqrt(3.0 * snr / (m - 1.0)));
    const double p_rail = 2.0 * (1.0 - 1.0 / std::sqrt(double(m))) * q;
    return 1.0 - (1.0 - p_rail) * (1.0 - p_rail);
}

// Message error probability when any of the T_fb / N_t symbols is in error.
inline double feedback_error_prob(double p_s, double t_fb, int n_tx)
{
    if (p_s < 0.0 || p_s > 1.0)
        throw std::invalid_argument("feedback_error_prob: p_s must lie in [0, 1]");
    if (t_fb < 0.0)
        throw std::invalid_argument("feedback_error_prob: t_fb must be non-negative");
    if (t_fb == 0.0)
        return 0.0;
    if (p_s == 1.0)
        return 1.0;
    return -std::expm1(t_fb / n_tx * std::log1p(-p_s));
}

// Bits carried by T_fb feedback symbols split over N_t users with M-QAM.
inline double qam_feedback_bits(double t_fb, int m, int n_tx) { return t_fb * std::log2(double(m)) / n_tx; }
inline double qam_feedback_len(double bits, int m, int n_tx) { return bits * n_tx / std::log2(double(m)); }

// g for B-bit RVQ feedback: (N_t - 1)/T_tr + rho 2^(-B / (N_t - 1)).
inline double digital_gap_from_bits(double bits, int n_tx, double snr, double t_tr)
{
    if (bits < 0.0)
        throw std::invalid_argument("digital_gap_from_bits: bits must be non-negative");
    if (!(t_tr > 0.0))
        throw std::invalid_argument("digital_gap_from_bits: t_tr must be positive");
    return (n_tx - 1.0) / t_tr + snr * std::exp2(-bits / (n_tx - 1.0));
}

// Net per-user rate of a split under `scheme`, including the QAM message-error weighting:
//   (1 - T_t/T) (1 - P_e,fb) max(0, R^ZF - ln(1 + g)).
inline double net_rate(const FeedbackScheme& scheme, const ResourceSplit& split, double r_zf, double snr, int n_tx,
                       double block_len)
{
    const double g = gap_g(scheme, split, snr);
    double net = net_spectral_efficiency(r_zf, rate_gap(g), split.total(), block_len);
    if (scheme.kind == FeedbackKind::DigitalQam)
        net *= 1.0 - feedback_error_prob(qam_symbol_error(scheme.qam_order, snr), split.t_fb, n_tx);
    return net;
}

// Effective QAM rate loss (1 - P_e) ln(1 + g) + P_e R^ZF; minimised by the inner QAM step.
inline double qam_effective_loss(const FeedbackScheme& scheme, const ResourceSplit& split, double r_zf, double snr,
                                 int n_tx)
{
    const double pe = feedback_error_prob(qam_symbol_error(scheme.qam_order, snr), split.t_fb, n_tx);
    return (1.0 - pe) * rate_gap(gap_g(scheme, split, snr)) + pe * r_zf;
}

} // namespace csitopt

#endif
