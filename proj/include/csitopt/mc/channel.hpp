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

#ifndef CSITOPT_MC_CHANNEL_HPP
#define CSITOPT_MC_CHANNEL_HPP

// Rayleigh block fading. A channel block is a K x N_t matrix whose row k is the
// row vector seen by user k: y_k = H.row(k) * x + z_k.

#include "random.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace csitopt::mc
{

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

class rank_deficient_error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

inline CMatrix random_channel(Engine& g, int users, int n_tx)
{
    CMatrix h(users, n_tx);
    for (int k = 0; k < users; ++k)
        for (int j = 0; j < n_tx; ++j)
            h(k, j) = complex_normal(g);
    return h;
}

// Lazily generated, seed-reproducible sequence of channel blocks.
class ChannelBatch
{
public:
    ChannelBatch(std::uint64_t seed, std::size_t count, int users, int n_tx)
        : seed_(seed), count_(count), users_(users), n_tx_(n_tx)
    {
        if (users < 1 || n_tx < 1)
            throw std::invalid_argument("ChannelBatch: users and antennas must be positive");
    }

    CMatrix block(std::size_t i) const
    {
        if (i >= count_)
            throw std::out_of_range("ChannelBatch: block index");
        auto g = block_engine(seed_, i, ChannelStream);
        return random_channel(g, users_, n_tx_);
    }

    std::uint64_t seed() const { return seed_; }
    std::size_t count() const { return count_; }
    int users() const { return users_; }
    int n_tx() const { return n_tx_; }

private:
    std::uint64_t seed_;
    std::size_t count_;
    int users_;
    int n_tx_;
};

struct ChannelEstimate
{
    CMatrix estimate;
    double error_variance = 0.0; // per coefficient, 1 / (1 + T_tr rho / N_t)
};

// Linear MMSE estimate from T_tr orthogonal pilots at power P / N_t per antenna:
// s = sqrt(T_tr rho / N_t) h + z, h_hat = a / (1 + a^2) s.
inline ChannelEstimate mmse_estimate(const CMatrix& h, double t_tr, double snr, int n_tx, Engine& g)
{
    if (t_tr < n_tx)
        throw std::invalid_argument("mmse_estimate: t_tr must be at least N_t");
    if (!(snr > 0.0))
        throw std::invalid_argument("mmse_estimate: snr must be positive");
    const double a2 = t_tr * snr / n_tx;
    const double a = std::sqrt(a2);
    ChannelEstimate out;
    out.estimate.resize(h.rows(), h.cols());
    for (Eigen::Index k = 0; k < h.rows(); ++k)
        for (Eigen::Index j = 0; j < h.cols(); ++j)
            out.estimate(k, j) = a / (1.0 + a2) * (a * h(k, j) + complex_normal(g));
    out.error_variance = 1.0 / (1.0 + a2);
    return out;
}

// Unit-norm ZF beams: column k is orthogonal to every row j != k of `h_hat`.
inline CMatrix zf_beamformers(const CMatrix& h_hat)
{
    const Eigen::Index k = h_hat.rows();
    if (k > h_hat.cols())
        throw std::invalid_argument("zf_beamformers: more users than antennas");
    const CMatrix gram = h_hat * h_hat.adjoint();
    Eigen::FullPivLU<CMatrix> lu(gram);
    lu.setThreshold(1e-12);
    if (lu.rank() < k)
        throw rank_deficient_error("zf_beamformers: estimated channel is rank deficient");
    CMatrix v = h_hat.adjoint() * lu.inverse();
    for (Eigen::Index c = 0; c < k; ++c)
        v.col(c).normalize();
    return v;
}

// Per-user ln(1 + p |h_k v_k|^2 / (1 + p sum_{j != k} |h_k v_j|^2)), p = power per beam.
inline Eigen::VectorXd sinr_rates(const CMatrix& h, const CMatrix& v, double power_per_beam)
{
    const CMatrix gains = h * v;
    Eigen::VectorXd r(h.rows());
    for (Eigen::Index k = 0; k < h.rows(); ++k)
    {
        const double sig = std::norm(gains(k, k));
        const double all = gains.row(k).squaredNorm();
        r(k) = std::log1p(power_per_beam * sig / (1.0 + power_per_beam * (all - sig)));
    }
    return r;
}

} // namespace csitopt::mc

#endif
