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

#ifndef CSITOPT_MC_ERGODIC_HPP
#define CSITOPT_MC_ERGODIC_HPP

// Ergodic ZF rate with K = N_t users under several ways of forming CSIT.

#include "../parallel.hpp"
#include "../rates.hpp"
#include "../types.hpp"
#include "channel.hpp"
#include "random.hpp"
#include "rvq.hpp"
#include "stats.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace csitopt::mc
{

struct CsitSource
{
    enum class Kind
    {
        Perfect,    // BS knows H
        Mmse,       // BS-side MMSE estimate (uplink pilots, reciprocity)
        MmseAnalog, // user MMSE estimate sent as unquantized symbols
        MmseRvq,    // user MMSE estimate, direction quantized with B bits
        MmseQam     // as MmseRvq, bits carried by uncoded M-QAM; any symbol error voids the message
    };

    Kind kind = Kind::Perfect;
    double t_tr = 0.0;
    double t_fb = 0.0;
    std::optional<double> bits; // RVQ bits per user; default T_fb log2(1+rho)/N_t
    int qam_order = 4;

    static CsitSource perfect() { return {}; }
    static CsitSource mmse(double t_tr) { return {Kind::Mmse, t_tr, 0.0, std::nullopt, 4}; }
    static CsitSource analog(double t_tr, double t_fb) { return {Kind::MmseAnalog, t_tr, t_fb, std::nullopt, 4}; }
    static CsitSource rvq(double t_tr, double t_fb) { return {Kind::MmseRvq, t_tr, t_fb, std::nullopt, 4}; }
    static CsitSource rvq_bits(double t_tr, double bits) { return {Kind::MmseRvq, t_tr, 0.0, bits, 4}; }
    static CsitSource qam(double t_tr, double t_fb, int m = 4) { return {Kind::MmseQam, t_tr, t_fb, std::nullopt, m}; }

    // Source matching a closed-form feedback scheme at a given split.
    static CsitSource for_scheme(const FeedbackScheme& s, const ResourceSplit& split)
    {
        switch (s.kind)
        {
        case FeedbackKind::TddOpenLoop:
            return mmse(split.t_tr);
        case FeedbackKind::Analog:
            return analog(split.t_tr, split.t_fb);
        case FeedbackKind::DigitalErrorFree:
            return rvq(split.t_tr, split.t_fb);
        case FeedbackKind::DigitalQam:
            return qam(split.t_tr, split.t_fb, s.qam_order);
        }
        return {};
    }

    double feedback_bits(int n_tx, double snr) const
    {
        if (bits)
            return *bits;
        if (kind == Kind::MmseQam)
            return qam_feedback_bits(t_fb, qam_order, n_tx);
        return t_fb * std::log2(1.0 + snr) / n_tx;
    }
};

inline std::string to_string(CsitSource::Kind k)
{
    switch (k)
    {
    case CsitSource::Kind::Perfect:
        return "perfect";
    case CsitSource::Kind::Mmse:
        return "mmse";
    case CsitSource::Kind::MmseAnalog:
        return "mmse+analog";
    case CsitSource::Kind::MmseRvq:
        return "mmse+rvq";
    case CsitSource::Kind::MmseQam:
        return "mmse+qam";
    }
    return "?";
}

struct CsitDraw
{
    CMatrix bs_view;             // what the BS uses to build ZF beams
    std::vector<bool> voided;    // user whose feedback message was lost
};

// Analog uplink: each coefficient of the user estimate reaches the BS at SNR rho T_fb / N_t^2
// and is MMSE-combined there.
inline CMatrix analog_feedback(const CMatrix& user_view, double est_var, double t_fb, double snr, int n_tx,
                               Engine& g)
{
    if (!(t_fb > 0.0))
        throw std::invalid_argument("analog_feedback: t_fb must be positive");
    const double q = snr * t_fb / (double(n_tx) * n_tx);
    const double b = std::sqrt(q);
    const double sig_var = 1.0 - est_var;
    const double c = b * sig_var / (q * sig_var + 1.0);
    CMatrix out(user_view.rows(), user_view.cols());
    for (Eigen::Index k = 0; k < user_view.rows(); ++k)
        for (Eigen::Index j = 0; j < user_view.cols(); ++j)
            out(k, j) = c * (b * user_view(k, j) + complex_normal(g));
    return out;
}

inline CsitDraw draw_csit(const CMatrix& h, const CsitSource& src, double snr, int n_tx, Engine& g)
{
    CsitDraw d;
    d.voided.assign(std::size_t(h.rows()), false);
    if (src.kind == CsitSource::Kind::Perfect)
    {
        d.bs_view = h;
        return d;
    }
    const auto est = mmse_estimate(h, src.t_tr, snr, n_tx, g);
    switch (src.kind)
    {
    case CsitSource::Kind::Mmse:
        d.bs_view = est.estimate;
        break;
    case CsitSource::Kind::MmseAnalog:
        d.bs_view = analog_feedback(est.estimate, est.error_variance, src.t_fb, snr, n_tx, g);
        break;
    case CsitSource::Kind::MmseRvq:
    case CsitSource::Kind::MmseQam: {
        const double bits = src.feedback_bits(n_tx, snr);
        const double pe = src.kind == CsitSource::Kind::MmseQam
                              ? feedback_error_prob(qam_symbol_error(src.qam_order, snr), src.t_fb, n_tx)
                              : 0.0;
        d.bs_view.resize(h.rows(), h.cols());
        for (Eigen::Index k = 0; k < h.rows(); ++k)
        {
            const CVector row = est.estimate.row(k).transpose();
            const auto qz = rvq_quantize_auto(row, bits, g);
            CVector dir = qz.direction;
            if (pe > 0.0 && uniform01(g) < pe)
            {
                d.voided[std::size_t(k)] = true;
                dir = isotropic_unit(g, n_tx); // wrong index decodes to an unrelated codeword
            }
            d.bs_view.row(k) = dir.transpose();
        }
        break;
    }
    case CsitSource::Kind::Perfect:
        break;
    }
    return d;
}

struct McResult
{
    Estimate rate; // nats/use/user
    std::uint64_t seed = 0;
    std::size_t blocks = 0;
};

// E[ln(1 + SINR_k)] averaged over users with equal power rho / N_t per beam.
// Users whose feedback was voided contribute zero.
inline McResult ergodic_rate_mc(const SystemConfig& cfg, const CsitSource& src, std::size_t blocks,
                                std::uint64_t seed, int threads = thread_count())
{
    cfg.validate();
    if (blocks < 2)
        throw std::invalid_argument("ergodic_rate_mc: need at least 2 blocks");
    const int n = cfg.n_tx;
    const ChannelBatch batch(seed, blocks, n, n);
    std::vector<double> per_block(blocks);
    parallel_for(
        blocks,
        [&](std::size_t i) {
            const CMatrix h = batch.block(i);
            auto g = block_engine(seed, i, AuxStream);
            const auto csit = draw_csit(h, src, cfg.snr, n, g);
            const CMatrix v = zf_beamformers(csit.bs_view);
            const Eigen::VectorXd r = sinr_rates(h, v, cfg.snr / n);
            double s = 0.0;
            for (int k = 0; k < n; ++k)
                if (!csit.voided[std::size_t(k)])
                    s += r(k);
            per_block[i] = s / n;
        },
        threads);
    return {summarize(per_block), seed, blocks};
}

// Closed-form lower bound matching a CSIT source: (1 - P_e)(R - ln(1 + g)).
inline double closed_form_rate_bound(const SystemConfig& cfg, const CsitSource& src)
{
    const int n = cfg.n_tx;
    const double r = zf_rate_perfect_csit(n, cfg.snr);
    const double train = src.kind == CsitSource::Kind::Perfect ? 0.0 : (n - 1.0) / src.t_tr;
    double g = 0.0, pe = 0.0;
    switch (src.kind)
    {
    case CsitSource::Kind::Perfect:
        break;
    case CsitSource::Kind::Mmse:
        g = train;
        break;
    case CsitSource::Kind::MmseAnalog:
        g = train + n * (n - 1.0) / src.t_fb;
        break;
    case CsitSource::Kind::MmseRvq:
        g = digital_gap_from_bits(src.feedback_bits(n, cfg.snr), n, cfg.snr, src.t_tr);
        break;
    case CsitSource::Kind::MmseQam:
        g = digital_gap_from_bits(src.feedback_bits(n, cfg.snr), n, cfg.snr, src.t_tr);
        pe = feedback_error_prob(qam_symbol_error(src.qam_order, cfg.snr), src.t_fb, n);
        break;
    }
    return (1.0 - pe) * (r - std::log1p(g));
}

} // namespace csitopt::mc

#endif
