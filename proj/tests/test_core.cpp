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

#include "oracles.hpp"

#include <csitopt/rates.hpp>
#include <csitopt/special.hpp>
#include <csitopt/types.hpp>

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace csitopt;
using Catch::Approx;

TEST_CASE("E1 matches series and quadrature", "[special]")
{
    CHECK(exp_integral_e1(0.4) == Approx(0.702380).margin(1e-6));
    CHECK(exp_integral_e1(0.04) == Approx(2.681264).margin(1e-6));
    for (double x : {1e-6, 1e-3, 0.04, 0.4, 0.9, 1.0})
        CHECK(exp_integral_e1(x) == Approx(oracle::e1_series(x)).epsilon(1e-11));
    for (double x : {0.05, 0.4, 1.5, 3.0, 8.0, 20.0})
        CHECK(exp_integral_e1(x) == Approx(oracle::e1_quadrature(x)).epsilon(1e-9));
    CHECK_THROWS_AS(exp_integral_e1(0.0), std::domain_error);
    CHECK_THROWS_AS(exp_integral_e1(-1.0), std::domain_error);
}

TEST_CASE("E1 decays monotonically under its exponential envelope", "[special]")
{
    double prev = exp_integral_e1(1.0);
    for (double x = 1.5; x < 600.0; x *= 1.5)
    {
        const double v = exp_integral_e1(x);
        CHECK(v < prev);
        CHECK(v <= std::exp(-x) / x);
        prev = v;
    }
}

TEST_CASE("x e^x E1(x) lies between x/(x+1) and 1", "[special][property]")
{
    for (double lx = -8.0; lx <= 3.0; lx += 0.1)
    {
        const double x = std::pow(10.0, lx);
        const double v = x * scaled_exp_integral_e1(x);
        CHECK(v > x / (x + 1.0));
        CHECK(v < 1.0);
    }
    CHECK(scaled_exp_integral_e1(800.0) == Approx(exp_integral_e1(30.0) * std::exp(30.0) * 30.0 / 800.0).epsilon(0.05));
}

TEST_CASE("Q function against tail quadrature", "[special]")
{
    for (double x : {0.0, 0.5, 1.0, std::sqrt(10.0), 4.0, 6.0})
        CHECK(q_function(x) == Approx(oracle::q_quadrature(x)).epsilon(1e-9).margin(1e-15));
    CHECK(q_function(std::sqrt(10.0)) == Approx(7.827e-4).epsilon(1e-3));
}

TEST_CASE("perfect-CSIT ZF rate", "[core]")
{
    CHECK(zf_rate_perfect_csit(4, 10.0) == Approx(1.04787).margin(1e-4));
    CHECK(zf_rate_perfect_csit(4, 100.0) == Approx(2.79073).margin(1e-4));
    CHECK(zf_rate_perfect_csit(4, 100.0) == Approx(std::exp(0.04) * oracle::e1_series(0.04)).epsilon(1e-12));
    CHECK(nats_to_bits(zf_rate_perfect_csit(4, 10.0)) == Approx(1.5119).margin(1e-3));
    CHECK(zf_rate_perfect_csit(4, 0.0) == 0.0);
    CHECK(zf_rate_perfect_csit(4, 1e-9) == Approx(0.0).margin(1e-9));
}

TEST_CASE("perfect-CSIT ZF rate agrees with 1e7-draw Monte Carlo", "[core][mc]")
{
    std::uint64_t seed = 11;
    for (int n : {2, 4, 8})
        for (double rho : {1.0, 10.0, 100.0})
        {
            const auto [m, se] = oracle::exp_log_mc(rho / n, 10'000'000, seed++);
            INFO("N_t=" << n << " rho=" << rho << " mc=" << m << " se=" << se);
            CHECK(std::abs(zf_rate_perfect_csit(n, rho) - m) <= 3.0 * se);
        }
}

TEST_CASE("gap g per scheme", "[core]")
{
    CHECK(gap_g(FeedbackScheme::tdd(4), {24, 0}, 10.0) == Approx(0.125));
    CHECK(gap_g(FeedbackScheme::analog(4), {10, 20}, 10.0) == Approx(0.9));
    const double digital = 0.125 + 10.0 * std::pow(11.0, -28.5 / 12.0);
    CHECK(gap_g(FeedbackScheme::digital(4), {24, 28.5}, 10.0) == Approx(digital).epsilon(1e-14));
    CHECK(gap_g(FeedbackScheme::qam(4, 16), {24, 24}, 10.0) == Approx(0.125 + 10.0 * std::pow(16.0, -2.0)));
    CHECK_THROWS(gap_g(FeedbackScheme::tdd(4), {0, 0}, 10.0));
    CHECK_THROWS(gap_g(FeedbackScheme::analog(4), {10, 0}, 10.0));
    CHECK(gap_g(FeedbackScheme::digital(4), {10, 0}, 10.0) == Approx(0.3 + 10.0));
}

TEST_CASE("gap g strictly decreases in both lengths", "[core][property]")
{
    for (const auto& s : {FeedbackScheme::tdd(4), FeedbackScheme::analog(4), FeedbackScheme::digital(4),
                          FeedbackScheme::qam(4, 4), FeedbackScheme::qam(4, 64), FeedbackScheme::analog(8)})
        for (double rho : {1.0, 10.0, 100.0})
            for (double a = 1; a < 200; a += 7)
                for (double b = 1; b < 200; b += 7)
                {
                    const double g = gap_g(s, {a, b}, rho);
                    CHECK(gap_g(s, {a + 0.5, b}, rho) < g);
                    if (!s.uses_feedback())
                        continue;
                    // Strict only while the feedback term is resolvable next to the training term.
                    const double fb_term = g - s.theta_tr / a;
                    if (fb_term > 1e-12 * g)
                        CHECK(gap_g(s, {a, b + 0.5}, rho) < g);
                    else
                        CHECK(gap_g(s, {a, b + 0.5}, rho) <= g);
                }
}

TEST_CASE("rate gap and net spectral efficiency", "[core]")
{
    CHECK(rate_gap(0.0) == 0.0);
    CHECK(rate_gap(0.125) == Approx(0.11778).margin(1e-5));
    CHECK(rate_gap(std::exp(1.0) - 1.0) == Approx(1.0));
    CHECK_THROWS(rate_gap(-0.1));
    CHECK(net_spectral_efficiency(1.04787, 0.11778, 24, 200) == Approx(0.81848).margin(1e-5));
    CHECK(net_spectral_efficiency(1.2, 0.0, 0.0, 100) == 1.2);
    CHECK(net_spectral_efficiency(1.0, 1.5, 10, 100) == 0.0);
    CHECK_THROWS(net_spectral_efficiency(1.0, 0.1, 101, 100));
}

TEST_CASE("QAM symbol error", "[core]")
{
    const double q = oracle::q_quadrature(std::sqrt(10.0));
    CHECK(qam_symbol_error(4, 10.0) == Approx(1.0 - (1.0 - q) * (1.0 - q)).epsilon(1e-9));
    CHECK(qam_symbol_error(4, 10.0) == Approx(1.5652e-3).epsilon(1e-3));
    const double q1024 = oracle::q_quadrature(std::sqrt(30.0 / 1023.0));
    const double rail = 2.0 * (1.0 - 1.0 / 32.0) * q1024;
    CHECK(qam_symbol_error(1024, 10.0) == Approx(1.0 - (1.0 - rail) * (1.0 - rail)).epsilon(1e-9));
    CHECK(qam_symbol_error(1024, 10.0) == Approx(0.9735).margin(1e-3));
    CHECK(qam_symbol_error(4, 1e6) == Approx(0.0).margin(1e-12));
    CHECK_THROWS(qam_symbol_error(8, 10.0));
    CHECK_THROWS(qam_symbol_error(32, 10.0));
}

TEST_CASE("feedback message error", "[core]")
{
    CHECK(feedback_error_prob(1.5652e-3, 50, 4) == Approx(0.01939).margin(1e-5));
    CHECK(feedback_error_prob(0.0, 50, 4) == 0.0);
    CHECK(feedback_error_prob(0.3, 4, 4) == Approx(0.3));
    CHECK(qam_feedback_len(25, 4, 4) == Approx(50));
    CHECK(feedback_error_prob(qam_symbol_error(4, 10.0), qam_feedback_len(25, 4, 4), 4) == Approx(0.0194).margin(1e-4));
}

TEST_CASE("symbol and message errors match a QAM simulator", "[core][mc]")
{
    const auto [ps, se] = oracle::qam_ser_mc(4, 10.0, 1'000'000, 3);
    CHECK(std::abs(qam_symbol_error(4, 10.0) - ps) <= 3.0 * se);
    const auto [ps16, se16] = oracle::qam_ser_mc(16, 31.6, 1'000'000, 4);
    CHECK(std::abs(qam_symbol_error(16, 31.6) - ps16) <= 3.0 * se16);
    // Messages of 12 symbols: count messages with at least one error.
    std::mt19937_64 g(5);
    const double p = qam_symbol_error(4, 10.0);
    std::bernoulli_distribution err(p);
    const int msgs = 200000;
    int bad = 0;
    for (int i = 0; i < msgs; ++i)
    {
        bool any = false;
        for (int s = 0; s < 12; ++s)
            any |= err(g);
        bad += any;
    }
    const double pm = double(bad) / msgs;
    CHECK(std::abs(feedback_error_prob(p, 48, 4) - pm) <= 3.0 * std::sqrt(pm * (1 - pm) / msgs));
}

TEST_CASE("digital gap from bits", "[core]")
{
    CHECK(digital_gap_from_bits(0, 4, 10.0, 24) == Approx(10.125));
    CHECK(digital_gap_from_bits(25, 4, 10.0, 24) == Approx(0.125 + 10.0 * std::pow(2.0, -25.0 / 3.0)).epsilon(1e-14));
    CHECK(digital_gap_from_bits(400, 4, 10.0, 24) == Approx(0.125).epsilon(1e-12));
    CHECK_THROWS(digital_gap_from_bits(4, 4, 10.0, 0));
    // B = T_fb log2(1 + rho) / N_t bits reproduces the digital g.
    const double bits = 30.0 * std::log2(11.0) / 4.0;
    CHECK(digital_gap_from_bits(bits, 4, 10.0, 24) == Approx(gap_g(FeedbackScheme::digital(4), {24, 30}, 10.0)));
}

TEST_CASE("net rate is concave in training length", "[core][property]")
{
    const double T = 200;
    for (const auto& s : {FeedbackScheme::tdd(4), FeedbackScheme::analog(4), FeedbackScheme::digital(4),
                          FeedbackScheme::qam(4, 4)})
        for (double rho : {1.0, 10.0, 100.0})
        {
            const double r = zf_rate_perfect_csit(4, rho);
            for (double fb : {10.0, 30.0, 60.0})
            {
                const double fb_used = s.uses_feedback() ? fb : 0.0;
                auto f = [&](double t) {
                    const double g = gap_g(s, {t, fb_used}, rho);
                    return (1.0 - (t + fb_used) / T) * (r - rate_gap(g));
                };
                for (double t = 4.0; t + fb_used + 2.0 <= T; t += 1.0)
                    CHECK(2.0 * f(t + 1.0) - f(t) - f(t + 2.0) >= -1e-12);
            }
        }
}

TEST_CASE("unit conversions and config checks", "[core]")
{
    CHECK(db_to_linear(10.0) == Approx(10.0));
    CHECK(linear_to_db(100.0) == Approx(20.0));
    CHECK(bits_to_nats(1.512) == Approx(1.048).margin(1e-3));
    CHECK(sum_rate_bps(1.0, 200e3, 4) == Approx(200e3 * 4 / std::log(2.0)));
    SystemConfig c;
    CHECK_NOTHROW(c.check_coherence_block());
    CHECK_NOTHROW(c.check_resource_block());
    c.n_users = 3;
    CHECK_THROWS(c.validate());
    c = SystemConfig{};
    c.coherence_bw = 100e3;
    CHECK_THROWS(c.check_coherence_block());
    CHECK(SystemConfig{}.with_block_len(500).coherence_time == Approx(2.5e-3));
    CHECK(is_square_qam(4));
    CHECK(is_square_qam(256));
    CHECK_FALSE(is_square_qam(9));
    CHECK_FALSE(is_square_qam(2));
    FeedbackScheme bad = FeedbackScheme::tdd(4);
    bad.theta_fb = 1.0;
    CHECK_THROWS(bad.validate());
    CHECK(feedback_kind_from_string("qam") == FeedbackKind::DigitalQam);
    CHECK_THROWS(feedback_kind_from_string("rvq"));
}
