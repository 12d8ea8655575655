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

#ifndef CSITOPT_EXPERIMENTS_HPP
#define CSITOPT_EXPERIMENTS_HPP

// Figure experiments: JSON specs in, CSV tables plus a JSON sidecar out.

#include "doppler.hpp"
#include "joint.hpp"
#include "mc/ergodic.hpp"
#include "mc/selection.hpp"
#include "mc/summary.hpp"
#include "tradeoff.hpp"
#include "types.hpp"
#include "version.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace csitopt
{

class spec_error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct Table
{
    std::string name; // file stem
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

inline std::string format_number(double x)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    // to_chars ignores the C locale, so the decimal separator is always '.'
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 10);
    return std::string(buf, res.ptr);
}

// Comma-separated, '.' decimals, LF endings, header first.
inline void write_csv(const Table& t, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    for (std::size_t i = 0; i < t.header.size(); ++i)
        out << (i ? "," : "") << t.header[i];
    out << '\n';
    for (const auto& row : t.rows)
    {
        if (row.size() != t.header.size())
            throw std::logic_error("table " + t.name + ": row width differs from header");
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << format_number(row[i]);
        out << '\n';
    }
    if (!out)
        throw std::runtime_error("write failed: " + path.string());
}

struct Sweep
{
    std::string variable;
    std::vector<double> grid;
};

struct ExperimentSpec
{
    std::string name;
    SystemConfig config;
    std::vector<FeedbackScheme> schemes;
    Sweep sweep;
    std::uint64_t seed = 1;
    std::string output = "out";
    std::size_t mc_blocks = 100000;
    std::vector<double> speeds_kmh;
    double t_fb = 30.0; // fixed feedback length where the figure needs one
    int k_max = mc::max_feedback_users;
};

namespace detail
{

inline std::vector<double> range_grid(double from, double to, double step)
{
    if (!(step > 0.0) || to < from)
        throw spec_error("sweep: need step > 0 and to >= from");
    std::vector<double> g;
    for (long i = 0;; ++i)
    {
        const double x = from + double(i) * step;
        if (x > to + 1e-9 * std::max(1.0, std::abs(to)))
            break;
        g.push_back(x);
    }
    return g;
}

inline const std::map<std::string, int>& config_keys()
{
    static const std::map<std::string, int> keys{
        {"n_tx", 0},     {"n_users", 0},         {"snr_db", 0},   {"snr", 0},      {"block_len", 0},
        {"coherence_time", 0}, {"coherence_bw", 0}, {"block_time", 0}, {"block_bw", 0}, {"uplink_bw", 0},
        {"uplink_eff_bits", 0}};
    return keys;
}

template <typename T>
T get_typed(const nlohmann::json& j, const char* key, const std::string& where)
{
    try
    {
        return j.at(key).get<T>();
    }
    catch (const nlohmann::json::exception& e)
    {
        throw spec_error(where + "." + key + ": " + e.what());
    }
}

} // namespace detail

// Config keys mirror SystemConfig; SNR is given in dB ("snr_db") or linear ("snr"),
// the uplink efficiency in bit/s/Hz ("uplink_eff_bits"). T_c, T_f follow block_len
// unless given explicitly.
inline SystemConfig parse_config(const nlohmann::json& j, SystemConfig base = {})
{
    if (!j.is_object())
        throw spec_error("config must be an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!detail::config_keys().count(it.key()))
            throw spec_error("config: unknown key '" + it.key() + "'");
    if (j.contains("snr_db") && j.contains("snr"))
        throw spec_error("config: give either snr_db or snr");
    SystemConfig c = base;
    if (j.contains("block_len"))
        c = c.with_block_len(detail::get_typed<double>(j, "block_len", "config"));
    if (j.contains("n_tx"))
        c.n_tx = detail::get_typed<int>(j, "n_tx", "config");
    c.n_users = j.contains("n_users") ? detail::get_typed<int>(j, "n_users", "config") : std::max(c.n_users, c.n_tx);
    if (j.contains("snr_db"))
        c.snr = db_to_linear(detail::get_typed<double>(j, "snr_db", "config"));
    if (j.contains("snr"))
        c.snr = detail::get_typed<double>(j, "snr", "config");
    for (auto [key, field] : {std::pair{"coherence_time", &SystemConfig::coherence_time},
                              std::pair{"coherence_bw", &SystemConfig::coherence_bw},
                              std::pair{"block_time", &SystemConfig::block_time},
                              std::pair{"block_bw", &SystemConfig::block_bw},
                              std::pair{"uplink_bw", &SystemConfig::uplink_bw}})
        if (j.contains(key))
            c.*field = detail::get_typed<double>(j, key, "config");
    if (j.contains("uplink_eff_bits"))
        c.uplink_eff = bits_to_nats(detail::get_typed<double>(j, "uplink_eff_bits", "config"));
    try
    {
        c.validate();
    }
    catch (const std::invalid_argument& e)
    {
        throw spec_error(e.what());
    }
    return c;
}

// Linear SNR only, so the output parses back through parse_config unchanged.
inline nlohmann::json config_to_json(const SystemConfig& c)
{
    return {{"n_tx", c.n_tx},
            {"n_users", c.n_users},
            {"snr", c.snr},
            {"block_len", c.block_len},
            {"coherence_time", c.coherence_time},
            {"coherence_bw", c.coherence_bw},
            {"block_time", c.block_time},
            {"block_bw", c.block_bw},
            {"uplink_bw", c.uplink_bw},
            {"uplink_eff_bits", nats_to_bits(c.uplink_eff)}};
}

inline FeedbackScheme parse_scheme(const nlohmann::json& j, int n_tx)
{
    if (j.is_string())
    {
        const auto s = j.get<std::string>();
        // "qam16" style names pick the constellation.
        if (s.rfind("qam", 0) == 0 && s.size() > 3)
        {
            try
            {
                return FeedbackScheme::qam(n_tx, std::stoi(s.substr(3)));
            }
            catch (const std::exception& e)
            {
                throw spec_error("scheme '" + s + "': " + e.what());
            }
        }
        try
        {
            return FeedbackScheme::of(feedback_kind_from_string(s), n_tx);
        }
        catch (const std::exception& e)
        {
            throw spec_error(e.what());
        }
    }
    throw spec_error("schemes must be given by name (tdd, analog, digital, qam, qam16, ...)");
}

inline std::string scheme_label(const FeedbackScheme& s)
{
    std::string l(to_string(s.kind));
    if (s.kind == FeedbackKind::DigitalQam && s.qam_order != 4)
        l += std::to_string(s.qam_order);
    return l;
}

struct FigureInfo
{
    std::string name;
    std::string description;
    std::string sweep_variable;
    bool monte_carlo = false;
    std::function<ExperimentSpec()> defaults;
    std::function<std::vector<Table>(const ExperimentSpec&, const std::filesystem::path&)> run;
};

namespace figures
{

inline std::vector<FeedbackScheme> feedback_schemes(int n)
{
    return {FeedbackScheme::analog(n), FeedbackScheme::digital(n), FeedbackScheme::qam(n, 4)};
}

inline std::vector<double> lambda_grid()
{
    auto g = detail::range_grid(0.02, 0.98, 0.02);
    g.push_back(0.99);
    return g;
}

inline ExperimentSpec base(const std::string& name, const std::string& var, std::vector<double> grid)
{
    ExperimentSpec s;
    s.name = name;
    s.schemes = {FeedbackScheme::tdd(4), FeedbackScheme::analog(4), FeedbackScheme::digital(4),
                 FeedbackScheme::qam(4, 4)};
    s.sweep = {var, std::move(grid)};
    s.output = "out/" + name;
    return s;
}

inline std::vector<double> block_grid()
{
    return {50, 100, 150, 200, 300, 400, 500, 750, 1000, 1250, 1500, 1750, 2000};
}

inline std::vector<Table> fig2(const ExperimentSpec& s, const std::filesystem::path&)
{
    Table t{"fig2", {"T"}, {}};
    for (const auto& sc : s.schemes)
    {
        t.header.push_back("t_tr_" + scheme_label(sc));
        if (sc.uses_feedback())
            t.header.push_back("t_fb_" + scheme_label(sc));
        if (sc.kind == FeedbackKind::DigitalQam)
            t.header.push_back("qam_order_" + scheme_label(sc));
    }
    t.rows.resize(s.sweep.grid.size());
    parallel_for(s.sweep.grid.size(), [&](std::size_t i) {
        const auto cfg = s.config.with_block_len(s.sweep.grid[i]);
        auto& row = t.rows[i];
        row.push_back(cfg.block_len);
        for (const auto& sc : s.schemes)
        {
            const auto r = optimize(cfg, sc);
            row.push_back(r.split.t_tr);
            if (sc.uses_feedback())
                row.push_back(r.split.t_fb);
            if (sc.kind == FeedbackKind::DigitalQam)
                row.push_back(r.qam_order.value_or(sc.qam_order));
        }
    });
    return {t};
}

// Sum spectral efficiency N_t * net / ln 2 [bit/s/Hz]; with mc_blocks > 0 the rate at each
// optimized split is also simulated.
inline std::vector<Table> fig3(const ExperimentSpec& s, const std::filesystem::path& out_dir)
{
    Table t{"fig3", {"T", "perfect_csit"}, {}};
    for (const auto& sc : s.schemes)
        t.header.push_back(scheme_label(sc));
    if (s.mc_blocks > 0)
        for (const auto& sc : s.schemes)
        {
            t.header.push_back(scheme_label(sc) + "_mc");
            t.header.push_back(scheme_label(sc) + "_mc_stderr");
        }
    const auto summaries = out_dir / "fig3_mc.jsonl";
    if (s.mc_blocks > 0)
        std::filesystem::remove(summaries);
    for (double T : s.sweep.grid)
    {
        const auto cfg = s.config.with_block_len(T);
        const double scale = cfg.n_tx / std::numbers::ln2;
        std::vector<double> row{T, scale * zf_rate_perfect_csit(cfg.n_tx, cfg.snr)};
        std::vector<OptimizationResult> opts;
        for (const auto& sc : s.schemes)
        {
            opts.push_back(optimize(cfg, sc));
            row.push_back(scale * opts.back().net_rate);
        }
        if (s.mc_blocks > 0)
            for (std::size_t k = 0; k < s.schemes.size(); ++k)
            {
                auto sc = s.schemes[k];
                if (opts[k].qam_order)
                    sc.qam_order = *opts[k].qam_order;
                const auto src = mc::CsitSource::for_scheme(sc, opts[k].split);
                const std::uint64_t seed = mc::mix_seed(s.seed, std::uint64_t(T) * 16 + k);
                const auto r = mc::ergodic_rate_mc(cfg, src, s.mc_blocks, seed);
                const double overhead = 1.0 - opts[k].split.total() / T;
                row.push_back(scale * overhead * r.rate.mean);
                row.push_back(scale * overhead * r.rate.std_error);
                nlohmann::json c = config_to_json(cfg);
                c["scheme"] = scheme_label(sc);
                c["t_tr"] = opts[k].split.t_tr;
                c["t_fb"] = opts[k].split.t_fb;
                c["blocks"] = s.mc_blocks;
                mc::append_json_line(summaries.string(), mc::summary_record(c, seed, r.rate));
            }
        t.rows.push_back(std::move(row));
    }
    return {t};
}

inline std::vector<double> point_columns(const ParetoPoint& p)
{
    return {p.t_fb, p.t_tr, p.r_down_bps / 1e3, p.r_up_bps / 1e3};
}

inline std::vector<std::string> point_header(const std::string& tag)
{
    return {"t_fb_" + tag, "t_tr_" + tag, "r_down_kbps_" + tag, "r_up_kbps_" + tag};
}

template <typename Boundary>
Table pareto_table(const std::string& name, std::span<const double> lambdas, Boundary&& boundary)
{
    Table t{name, {"lambda"}, {}};
    for (const char* tag : {"closed", "numeric", "exact"})
        for (auto& h : point_header(tag))
            t.header.push_back(std::move(h));
    t.rows.resize(lambdas.size());
    for (std::size_t i = 0; i < lambdas.size(); ++i)
    {
        const double l[1] = {lambdas[i]};
        const ParetoBoundary b = boundary(std::span<const double>(l));
        auto& row = t.rows[i];
        row.push_back(lambdas[i]);
        for (const auto* v : {&b.closed_form, &b.numeric, &b.exact})
            for (double x : point_columns(v->front()))
                row.push_back(x);
    }
    return t;
}

inline std::vector<FeedbackScheme> with_feedback(const ExperimentSpec& s)
{
    std::vector<FeedbackScheme> out;
    for (const auto& sc : s.schemes)
        if (sc.uses_feedback())
            out.push_back(sc);
    if (out.empty())
        throw spec_error(s.name + ": needs at least one feedback scheme");
    return out;
}

inline std::vector<Table> fig4(const ExperimentSpec& s, const std::filesystem::path&)
{
    std::vector<Table> out;
    for (const auto& sc : with_feedback(s))
        out.push_back(pareto_table("fig4_" + scheme_label(sc), s.sweep.grid,
                                   [&](std::span<const double> l) { return pareto_boundary(s.config, sc, l); }));
    return out;
}

inline std::vector<Table> fig5(const ExperimentSpec& s, const std::filesystem::path&)
{
    const auto schemes = with_feedback(s);
    Table t{"fig5", {"lambda"}, {}};
    for (const auto& sc : schemes)
        for (const char* tag : {"closed", "exact"})
            t.header.push_back("t_fb_" + scheme_label(sc) + "_" + tag);
    t.rows.resize(s.sweep.grid.size());
    parallel_for(s.sweep.grid.size(), [&](std::size_t i) {
        const double l = s.sweep.grid[i];
        auto& row = t.rows[i];
        row.push_back(l);
        for (const auto& sc : schemes)
        {
            row.push_back(tfb_of_lambda(s.config, sc, l));
            row.push_back(tfb_of_lambda_exact(s.config, sc, l));
        }
    });
    return {t};
}

inline std::string speed_tag(double v)
{
    return "v" + format_number(v);
}

inline std::vector<Table> fig6(const ExperimentSpec& s, const std::filesystem::path&)
{
    std::vector<Table> out;
    for (const auto& sc : with_feedback(s))
        for (double v : s.speeds_kmh)
        {
            const auto m = DopplerModel::uniform_kmh(v, default_carrier, s.config.block_time, 1);
            out.push_back(pareto_table("fig6_" + scheme_label(sc) + "_" + speed_tag(v), s.sweep.grid,
                                       [&](std::span<const double> l) { return delayed_pareto(s.config, m, sc, l); }));
        }
    return out;
}

inline std::vector<Table> fig7(const ExperimentSpec& s, const std::filesystem::path&)
{
    const auto schemes = with_feedback(s);
    Table t{"fig7", {"lambda"}, {}};
    for (const auto& sc : schemes)
        for (double v : s.speeds_kmh)
            for (const char* tag : {"closed", "exact"})
                t.header.push_back("t_fb_" + scheme_label(sc) + "_" + speed_tag(v) + "_" + tag);
    for (double l : s.sweep.grid)
    {
        std::vector<double> row{l};
        for (const auto& sc : schemes)
            for (double v : s.speeds_kmh)
            {
                const auto m = DopplerModel::uniform_kmh(v, default_carrier, s.config.block_time, 1);
                const double g[1] = {l};
                const auto b = delayed_pareto(s.config, m, sc, std::span<const double>(g));
                row.push_back(b.closed_form.front().t_fb);
                row.push_back(b.exact.front().t_fb);
            }
        t.rows.push_back(std::move(row));
    }
    return {t};
}

inline std::vector<Table> fig8(const ExperimentSpec& s, const std::filesystem::path&)
{
    const auto schemes = with_feedback(s);
    Table t{"fig8", {"speed_kmh", "doppler_shift"}, {}};
    for (const auto& sc : schemes)
    {
        t.header.push_back("r_down_kbps_" + scheme_label(sc));
        t.header.push_back("t_tr_" + scheme_label(sc));
    }
    std::vector<std::vector<SpeedRow>> cols;
    for (const auto& sc : schemes)
        cols.push_back(rate_vs_speed(s.config, sc, s.t_fb, s.sweep.grid));
    for (std::size_t i = 0; i < s.sweep.grid.size(); ++i)
    {
        std::vector<double> row{s.sweep.grid[i], cols.front()[i].shift};
        for (const auto& c : cols)
        {
            row.push_back(c[i].sum_rate_bps / 1e3);
            row.push_back(c[i].t_tr);
        }
        t.rows.push_back(std::move(row));
    }
    return {t};
}

inline mc::SelectionRateCache selection_cache(const ExperimentSpec& s, const std::filesystem::path& out_dir)
{
    return mc::SelectionRateCache(s.config.n_tx, s.config.snr, s.mc_blocks, s.seed,
                                  (out_dir / "selection_rates.jsonl").string());
}

inline std::vector<Table> fig9(const ExperimentSpec& s, const std::filesystem::path& out_dir)
{
    auto cache = selection_cache(s, out_dir);
    const int n = s.config.n_tx;
    const int k_small = std::min(s.k_max, n + 4);
    Table t{"fig9", {"t_fb"}, {}};
    for (int k = n; k <= k_small; ++k)
        t.header.push_back("sum_se_K" + std::to_string(k));
    t.header.push_back("best_K_upto" + std::to_string(k_small));
    t.header.push_back("best_K_upto" + std::to_string(s.k_max));
    for (int k = n; k <= s.k_max; ++k)
        cache.get(k);
    for (double tfb : s.sweep.grid)
    {
        std::vector<double> row{tfb};
        for (int k = n; k <= k_small; ++k)
            row.push_back(mc::w_of_tfb_users(s.config, tfb, k, cache.rate(k)).w_sum / std::numbers::ln2);
        row.push_back(mc::best_user_count(s.config, tfb, cache, n, k_small).users);
        row.push_back(mc::best_user_count(s.config, tfb, cache, n, s.k_max).users);
        t.rows.push_back(std::move(row));
    }
    return {t};
}

inline std::vector<Table> fig10(const ExperimentSpec& s, const std::filesystem::path& out_dir)
{
    auto cache = selection_cache(s, out_dir);
    const int n = s.config.n_tx;
    Table t{"fig10", {"t_fb", "best_K", "sum_se_best", "sum_se_K" + std::to_string(n)}, {}};
    for (int k = n; k <= s.k_max; ++k)
        cache.get(k);
    for (double tfb : s.sweep.grid)
    {
        const auto best = mc::best_user_count(s.config, tfb, cache, n, s.k_max);
        const auto base = mc::w_of_tfb_users(s.config, tfb, n, cache.rate(n));
        t.rows.push_back({tfb, double(best.users), best.w_sum / std::numbers::ln2, base.w_sum / std::numbers::ln2});
    }
    return {t};
}

inline std::vector<Table> fig11(const ExperimentSpec& s, const std::filesystem::path& out_dir)
{
    auto cache = selection_cache(s, out_dir);
    const int n = s.config.n_tx;
    Table t{"fig11",
            {"lambda", "K", "t_fb", "t_tr", "r_down_kbps", "r_up_kbps", "uplink_fraction", "t_fb_K" + std::to_string(n),
             "r_down_kbps_K" + std::to_string(n), "r_up_kbps_K" + std::to_string(n)},
            {}};
    for (double l : s.sweep.grid)
    {
        const auto p = mc::pareto_with_users(s.config, cache, l, s.k_max);
        const auto q = mc::pareto_with_users(s.config, cache, l, n);
        t.rows.push_back({l, double(p.users), p.t_fb, p.t_tr, p.r_down_bps / 1e3, p.r_up_bps / 1e3,
                          p.uplink_fraction, q.t_fb, q.r_down_bps / 1e3, q.r_up_bps / 1e3});
    }
    return {t};
}

} // namespace figures

inline const std::vector<FigureInfo>& figure_registry()
{
    using namespace figures;
    static const std::vector<FigureInfo> reg = [] {
        std::vector<FigureInfo> r;
        auto add = [&](std::string name, std::string desc, std::string var, bool mc,
                       std::function<ExperimentSpec()> def, auto run) {
            r.push_back({std::move(name), std::move(desc), std::move(var), mc, std::move(def), run});
        };
        add("fig2", "training/feedback length vs block length", "T", false,
            [] { return base("fig2", "T", block_grid()); }, fig2);
        add("fig3", "sum spectral efficiency vs block length", "T", false,
            [] {
                auto s = base("fig3", "T", block_grid());
                s.mc_blocks = 0;
                return s;
            },
            fig3);
        add("fig4", "downlink vs uplink Pareto boundary (separate bands)", "lambda", false,
            [] {
                auto s = base("fig4", "lambda", lambda_grid());
                s.schemes = feedback_schemes(4);
                return s;
            },
            fig4);
        add("fig5", "feedback length vs lambda", "lambda", false,
            [] {
                auto s = base("fig5", "lambda", lambda_grid());
                s.schemes = {FeedbackScheme::analog(4), FeedbackScheme::digital(4)};
                return s;
            },
            fig5);
        add("fig6", "Pareto boundary with delayed feedback", "lambda", false,
            [] {
                auto s = base("fig6", "lambda", lambda_grid());
                s.schemes = {FeedbackScheme::digital(4)};
                s.speeds_kmh = {6, 50, 80};
                return s;
            },
            fig6);
        add("fig7", "feedback length vs lambda with delayed feedback", "lambda", false,
            [] {
                auto s = base("fig7", "lambda", lambda_grid());
                s.schemes = {FeedbackScheme::digital(4)};
                s.speeds_kmh = {6, 80};
                return s;
            },
            fig7);
        add("fig8", "downlink rate vs mobile speed", "v", false,
            [] {
                auto s = base("fig8", "v", detail::range_grid(0, 120, 5));
                s.schemes = feedback_schemes(4);
                s.t_fb = 30;
                return s;
            },
            fig8);
        add("fig9", "sum spectral efficiency vs feedback symbols, K = 4..8", "t_fb", true,
            [] {
                auto s = base("fig9", "t_fb", detail::range_grid(1, 200, 1));
                s.config = s.config.with_block_len(500);
                return s;
            },
            fig9);
        add("fig10", "sum spectral efficiency vs feedback symbols, K = 4..31", "t_fb", true,
            [] {
                auto s = base("fig10", "t_fb", detail::range_grid(1, 200, 1));
                s.config = s.config.with_block_len(500);
                return s;
            },
            fig10);
        add("fig11", "Pareto boundary with up to 31 users", "lambda", true,
            [] { return base("fig11", "lambda", lambda_grid()); }, fig11);
        return r;
    }();
    return reg;
}

inline const FigureInfo& find_figure(const std::string& name)
{
    for (const auto& f : figure_registry())
        if (f.name == name)
            return f;
    throw spec_error("unknown figure '" + name + "'");
}

// Fields absent from the JSON keep the figure's defaults.
inline ExperimentSpec parse_spec(const nlohmann::json& j)
{
    if (!j.is_object())
        throw spec_error("spec must be a JSON object");
    static const std::vector<std::string> known{"name",  "config",     "schemes", "sweep", "seed",
                                                "output", "mc_blocks", "speeds_kmh", "t_fb", "k_max"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            throw spec_error("spec: unknown key '" + it.key() + "'");
    const auto name = detail::get_typed<std::string>(j, "name", "spec");
    const auto& fig = find_figure(name);
    ExperimentSpec s = fig.defaults();
    if (j.contains("config"))
        s.config = parse_config(j["config"], s.config);
    if (j.contains("schemes"))
    {
        if (!j["schemes"].is_array() || j["schemes"].empty())
            throw spec_error("schemes must be a non-empty array");
        s.schemes.clear();
        for (const auto& e : j["schemes"])
            s.schemes.push_back(parse_scheme(e, s.config.n_tx));
    }
    else
        for (auto& sc : s.schemes)
        {
            const int m = sc.qam_order;
            sc = FeedbackScheme::of(sc.kind, s.config.n_tx);
            sc.qam_order = m;
        }
    if (j.contains("sweep"))
    {
        const auto& w = j["sweep"];
        if (!w.is_object())
            throw spec_error("sweep must be an object");
        const auto var = detail::get_typed<std::string>(w, "variable", "sweep");
        if (var != fig.sweep_variable)
            throw spec_error(name + " sweeps '" + fig.sweep_variable + "', not '" + var + "'");
        if (w.contains("grid"))
            s.sweep.grid = detail::get_typed<std::vector<double>>(w, "grid", "sweep");
        else
            s.sweep.grid = detail::range_grid(detail::get_typed<double>(w, "from", "sweep"),
                                              detail::get_typed<double>(w, "to", "sweep"),
                                              detail::get_typed<double>(w, "step", "sweep"));
    }
    if (j.contains("seed"))
        s.seed = detail::get_typed<std::uint64_t>(j, "seed", "spec");
    if (j.contains("output"))
        s.output = detail::get_typed<std::string>(j, "output", "spec");
    if (j.contains("mc_blocks"))
        s.mc_blocks = detail::get_typed<std::size_t>(j, "mc_blocks", "spec");
    if (j.contains("speeds_kmh"))
        s.speeds_kmh = detail::get_typed<std::vector<double>>(j, "speeds_kmh", "spec");
    if (j.contains("t_fb"))
        s.t_fb = detail::get_typed<double>(j, "t_fb", "spec");
    if (j.contains("k_max"))
        s.k_max = detail::get_typed<int>(j, "k_max", "spec");
    return s;
}

inline void check_spec(const ExperimentSpec& s)
{
    const auto& fig = find_figure(s.name);
    if (s.sweep.grid.empty())
        throw spec_error("sweep grid is empty");
    for (std::size_t i = 1; i < s.sweep.grid.size(); ++i)
        if (!(s.sweep.grid[i] > s.sweep.grid[i - 1]))
            throw spec_error("sweep grid must be strictly increasing");
    if (fig.sweep_variable == "lambda")
        for (double l : s.sweep.grid)
            if (!(l > 0.0 && l < 1.0))
                throw spec_error("lambda grid must lie in (0, 1)");
    if (fig.sweep_variable == "T" && s.sweep.grid.front() < s.config.n_tx)
        throw spec_error("block lengths must be at least N_t");
    if (fig.sweep_variable == "t_fb" && s.sweep.grid.front() < 0.0)
        throw spec_error("feedback lengths must be non-negative");
    if (fig.sweep_variable == "v" && s.sweep.grid.front() < 0.0)
        throw spec_error("speeds must be non-negative");
    if (fig.monte_carlo && s.mc_blocks < 2)
        throw spec_error(s.name + " needs mc_blocks >= 2");
    if (fig.monte_carlo && s.k_max < s.config.n_tx)
        throw spec_error("k_max must be at least n_tx");
    if ((s.name == "fig6" || s.name == "fig7") && s.speeds_kmh.empty())
        throw spec_error(s.name + " needs speeds_kmh");
    for (double v : s.speeds_kmh)
        if (!(v >= 0.0))
            throw spec_error("speeds_kmh must be non-negative");
    for (const auto& sc : s.schemes)
    {
        try
        {
            sc.validate();
        }
        catch (const std::invalid_argument& e)
        {
            throw spec_error(e.what());
        }
    }
}

inline nlohmann::json spec_to_json(const ExperimentSpec& s)
{
    nlohmann::json schemes = nlohmann::json::array();
    for (const auto& sc : s.schemes)
        schemes.push_back(scheme_label(sc));
    return {{"name", s.name},
            {"config", config_to_json(s.config)},
            {"schemes", schemes},
            {"sweep", {{"variable", s.sweep.variable}, {"grid", s.sweep.grid}}},
            {"seed", s.seed},
            {"output", s.output},
            {"mc_blocks", s.mc_blocks},
            {"speeds_kmh", s.speeds_kmh},
            {"t_fb", s.t_fb},
            {"k_max", s.k_max}};
}

struct RunOutcome
{
    std::vector<std::filesystem::path> files;
    std::filesystem::path sidecar;
    double wall_clock_s = 0.0;
};

// Writes <output>/<table>.csv for every table and <output>/<name>.json as sidecar.
inline RunOutcome run_experiment(const ExperimentSpec& s)
{
    check_spec(s);
    const auto& fig = find_figure(s.name);
    const std::filesystem::path dir(s.output);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
    const auto t0 = std::chrono::steady_clock::now();
    const auto tables = fig.run(s, dir);
    RunOutcome out;
    for (const auto& t : tables)
    {
        out.files.push_back(dir / (t.name + ".csv"));
        write_csv(t, out.files.back());
    }
    out.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    nlohmann::json side;
    side["figure"] = s.name;
    side["description"] = fig.description;
    side["spec"] = spec_to_json(s);
    side["seed"] = s.seed;
    side["version"] = version_string;
    side["threads"] = thread_count();
    side["wall_clock_s"] = out.wall_clock_s;
    nlohmann::json files = nlohmann::json::array();
    for (const auto& f : out.files)
        files.push_back(f.filename().string());
    side["files"] = files;
    out.sidecar = dir / (s.name + ".json");
    std::ofstream js(out.sidecar, std::ios::binary);
    if (!js)
        throw std::runtime_error("cannot write " + out.sidecar.string());
    js << side.dump(2) << '\n';
    return out;
}

} // namespace csitopt

#endif
