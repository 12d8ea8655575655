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

#ifndef CSITOPT_TYPES_HPP
#define CSITOPT_TYPES_HPP

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace csitopt
{

// Raised when a problem instance has no feasible point (e.g. T < N_t).
class infeasible_error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double bits_to_nats(double bits) { return bits * std::numbers::ln2; }
inline double nats_to_bits(double nats) { return nats / std::numbers::ln2; }

// Sum rate in bit/s of `users` streams, each carrying `rate_nats` nats per channel use
// over `bandwidth_hz`.
inline double sum_rate_bps(double rate_nats, double bandwidth_hz, double users)
{
    return bandwidth_hz * users * rate_nats / std::numbers::ln2;
}

// System parameters shared by all three block models.
//   model 1/2: block_len == coherence_bw * coherence_time
//   model 3:   block_len == block_bw * block_time
// All rates are nats per channel use; uplink_eff included.
struct SystemConfig
{
    int n_tx = 4;                 // BS antennas N_t
    int n_users = 4;              // users K (>= N_t)
    double snr = 10.0;            // linear rho = P / N_0
    double block_len = 200.0;     // T, channel uses per block
    double coherence_time = 1e-3; // T_c [s]
    double coherence_bw = 200e3;  // W_c [Hz]
    double block_time = 1e-3;     // T_f [s]
    double block_bw = 200e3;      // W_f [Hz]
    double uplink_bw = 200e3;     // W_up [Hz]
    double uplink_eff = bits_to_nats(1.512); // C_up [nats/use]

    // One LTE resource block: 200 kHz x 1 ms, N_t = 4, 10 dB.
    static SystemConfig lte_resource_block() { return {}; }

    void validate() const
    {
        if (n_tx < 2)
            throw std::invalid_argument("SystemConfig: n_tx must be >= 2");
        if (n_users < n_tx)
            throw std::invalid_argument("SystemConfig: n_users must be >= n_tx");
        if (!(snr > 0.0) || !(block_len > 0.0) || !(coherence_time > 0.0) || !(coherence_bw > 0.0) ||
            !(block_time > 0.0) || !(block_bw > 0.0) || !(uplink_bw > 0.0) || !(uplink_eff > 0.0))
            throw std::invalid_argument("SystemConfig: all physical parameters must be positive");
    }

    // T = W_c T_c (block fading, models 1 and 2).
    void check_coherence_block(double rel_tol = 1e-9) const
    {
        validate();
        if (std::abs(block_len - coherence_bw * coherence_time) > rel_tol * block_len)
            throw std::invalid_argument("SystemConfig: block_len != coherence_bw * coherence_time");
    }

    // T = W_f T_f (resource block of the correlated-fading model).
    void check_resource_block(double rel_tol = 1e-9) const
    {
        validate();
        if (std::abs(block_len - block_bw * block_time) > rel_tol * block_len)
            throw std::invalid_argument("SystemConfig: block_len != block_bw * block_time");
    }

    // Same physical bandwidths, different block length; T_c and T_f follow T.
    SystemConfig with_block_len(double T) const
    {
        SystemConfig c = *this;
        c.block_len = T;
        c.coherence_time = T / coherence_bw;
        c.block_time = T / block_bw;
        return c;
    }
};

enum class FeedbackKind
{
    TddOpenLoop,
    Analog,
    DigitalErrorFree,
    DigitalQam
};

inline std::string_view to_string(FeedbackKind k)
{
    switch (k)
    {
    case FeedbackKind::TddOpenLoop:
        return "tdd";
    case FeedbackKind::Analog:
        return "analog";
    case FeedbackKind::DigitalErrorFree:
        return "digital";
    case FeedbackKind::DigitalQam:
        return "qam";
    }
    return "?";
}

inline FeedbackKind feedback_kind_from_string(std::string_view s)
{
    if (s == "tdd")
        return FeedbackKind::TddOpenLoop;
    if (s == "analog")
        return FeedbackKind::Analog;
    if (s == "digital")
        return FeedbackKind::DigitalErrorFree;
    if (s == "qam")
        return FeedbackKind::DigitalQam;
    throw std::invalid_argument("unknown feedback scheme '" + std::string(s) + "'");
}

inline bool is_square_qam(int m)
{
    if (m < 4)
        return false;
    int r = 1;
    while (r * r < m)
        ++r;
    return r * r == m && (m & (m - 1)) == 0;
}

// CSIT acquisition scheme with its weights.
// g(T_tr, T_fb) = theta_tr / T_tr + theta_fb / T_fb for the analog family.
struct FeedbackScheme
{
    FeedbackKind kind = FeedbackKind::TddOpenLoop;
    double theta_tr = 3.0;
    double theta_fb = 0.0;
    int qam_order = 4;                 // DigitalQam only
    std::optional<double> fb_bits;     // fixed B for digital kinds, if any

    static FeedbackScheme tdd(int n_tx) { return {FeedbackKind::TddOpenLoop, n_tx - 1.0, 0.0, 4, {}}; }
    static FeedbackScheme analog(int n_tx)
    {
        return {FeedbackKind::Analog, n_tx - 1.0, n_tx * (n_tx - 1.0), 4, {}};
    }
    static FeedbackScheme digital(int n_tx)
    {
        return {FeedbackKind::DigitalErrorFree, n_tx - 1.0, n_tx * (n_tx - 1.0), 4, {}};
    }
    static FeedbackScheme qam(int n_tx, int m = 4)
    {
        return {FeedbackKind::DigitalQam, n_tx - 1.0, n_tx * (n_tx - 1.0), m, {}};
    }
    static FeedbackScheme of(FeedbackKind k, int n_tx)
    {
        switch (k)
        {
        case FeedbackKind::TddOpenLoop:
            return tdd(n_tx);
        case FeedbackKind::Analog:
            return analog(n_tx);
        case FeedbackKind::DigitalErrorFree:
            return digital(n_tx);
        case FeedbackKind::DigitalQam:
            return qam(n_tx);
        }
        return tdd(n_tx);
    }

    bool uses_feedback() const { return kind != FeedbackKind::TddOpenLoop; }

    void validate() const
    {
        if (!(theta_tr > 0.0))
            throw std::invalid_argument("FeedbackScheme: theta_tr must be positive");
        if (theta_fb < 0.0)
            throw std::invalid_argument("FeedbackScheme: theta_fb must be non-negative");
        if ((theta_fb == 0.0) != (kind == FeedbackKind::TddOpenLoop))
            throw std::invalid_argument("FeedbackScheme: theta_fb == 0 exactly when open-loop TDD");
        if (kind == FeedbackKind::DigitalQam && !is_square_qam(qam_order))
            throw std::invalid_argument("FeedbackScheme: qam_order must be a power of 4");
        if (fb_bits && *fb_bits < 0.0)
            throw std::invalid_argument("FeedbackScheme: fb_bits must be non-negative");
    }
};

// (T_tr, T_fb) allocation within one block.
struct ResourceSplit
{
    double t_tr = 0.0;
    double t_fb = 0.0;

    double total() const { return t_tr + t_fb; }
    bool operator==(const ResourceSplit&) const = default;
};

struct RateResult
{
    double per_user_rate = 0.0;          // R^ZF - Delta R, nats/use
    double net_per_user = 0.0;           // after training/feedback overhead
    std::optional<double> sum_rate_bps;  // when a bandwidth is attached
};

} // namespace csitopt

#endif
