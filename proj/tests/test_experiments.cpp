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
#include <catch_amalgamated.hpp>

#include "csitopt/experiments.hpp"
#include "csitopt/validation.hpp"

#include <clocale>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

using namespace csitopt;
using Catch::Approx;
using nlohmann::json;
namespace fs = std::filesystem;

namespace
{

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Fresh per-test scratch directory, removed on scope exit.
struct ScratchDir
{
    fs::path path;
    explicit ScratchDir(const std::string& tag)
        : path(fs::temp_directory_path() / ("csitopt_test_" + tag + "_" + std::to_string(::getpid())))
    {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~ScratchDir() { fs::remove_all(path); }
};

std::vector<std::vector<std::string>> parse_csv(const std::string& text)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
    {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ','))
            cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

} // namespace

TEST_CASE("spec parsing applies figure defaults and overrides", "[spec]")
{
    const auto s = parse_spec(json{{"name", "fig2"}});
    CHECK(s.name == "fig2");
    CHECK(s.sweep.variable == "T");
    CHECK(s.sweep.grid == figures::block_grid());
    CHECK(s.schemes.size() == 4);
    CHECK(s.seed == 1);

    const auto t = parse_spec(json::parse(R"({
        "name": "fig4",
        "config": {"n_tx": 6, "snr_db": 20, "block_len": 300},
        "schemes": ["digital", "qam16"],
        "sweep": {"variable": "lambda", "from": 0.1, "to": 0.9, "step": 0.2},
        "seed": 42,
        "output": "somewhere"
    })"));
    CHECK(t.config.n_tx == 6);
    CHECK(t.config.n_users == 6);
    CHECK(t.config.snr == Approx(100.0).epsilon(1e-12));
    CHECK(t.config.block_len == 300.0);
    CHECK(t.config.coherence_time * t.config.coherence_bw == Approx(300.0));
    REQUIRE(t.schemes.size() == 2);
    CHECK(t.schemes[0].kind == FeedbackKind::DigitalErrorFree);
    CHECK(t.schemes[0].theta_fb == 30.0);
    CHECK(t.schemes[1].kind == FeedbackKind::DigitalQam);
    CHECK(t.schemes[1].qam_order == 16);
    REQUIRE(t.sweep.grid.size() == 5);
    CHECK(t.sweep.grid.back() == Approx(0.9));
    CHECK(t.seed == 42);
    CHECK(t.output == "somewhere");
}

TEST_CASE("default schemes follow the configured antenna count", "[spec]")
{
    const auto s = parse_spec(json::parse(R"({"name": "fig2", "config": {"n_tx": 8}})"));
    for (const auto& sc : s.schemes)
        CHECK(sc.theta_tr == 7.0);
}

TEST_CASE("malformed specs raise spec_error", "[spec]")
{
    const char* bad[] = {
        R"([1, 2])",
        R"({"config": {}})",
        R"({"name": "fig99"})",
        R"({"name": "fig2", "colour": "red"})",
        R"({"name": "fig2", "config": {"antennas": 4}})",
        R"({"name": "fig2", "config": {"snr": 10, "snr_db": 10}})",
        R"({"name": "fig2", "config": {"n_tx": 1}})",
        R"({"name": "fig2", "config": {"n_tx": 4, "n_users": 2}})",
        R"({"name": "fig2", "config": {"snr": -1}})",
        R"({"name": "fig2", "config": {"n_tx": "four"}})",
        R"({"name": "fig2", "schemes": []})",
        R"({"name": "fig2", "schemes": ["smoke_signals"]})",
        R"({"name": "fig2", "schemes": ["qam8"]})",
        R"({"name": "fig2", "sweep": {"variable": "lambda", "grid": [0.5]}})",
        R"({"name": "fig2", "sweep": {"variable": "T", "from": 10, "to": 5, "step": 1}})",
        R"({"name": "fig2", "sweep": {"variable": "T", "from": 10, "to": 50, "step": 0}})",
        R"({"name": "fig2", "seed": "abc"})",
    };
    for (const char* text : bad)
    {
        INFO(text);
        CHECK_THROWS_AS(check_spec(parse_spec(json::parse(text))), spec_error);
    }
}

TEST_CASE("check_spec rejects bad grids and figure requirements", "[spec]")
{
    auto expect_bad = [](const char* text) {
        INFO(text);
        const auto s = parse_spec(json::parse(text));
        CHECK_THROWS_AS(check_spec(s), spec_error);
    };
    expect_bad(R"({"name": "fig2", "sweep": {"variable": "T", "grid": [100, 50]}})");
    expect_bad(R"({"name": "fig2", "sweep": {"variable": "T", "grid": [100, 100]}})");
    expect_bad(R"({"name": "fig2", "sweep": {"variable": "T", "grid": []}})");
    expect_bad(R"({"name": "fig2", "sweep": {"variable": "T", "grid": [2, 100]}})");
    expect_bad(R"({"name": "fig4", "sweep": {"variable": "lambda", "grid": [0.0, 0.5]}})");
    expect_bad(R"({"name": "fig4", "sweep": {"variable": "lambda", "grid": [0.5, 1.0]}})");
    expect_bad(R"({"name": "fig6", "speeds_kmh": []})");
    expect_bad(R"({"name": "fig6", "speeds_kmh": [-5]})");
    expect_bad(R"({"name": "fig9", "mc_blocks": 1})");
    expect_bad(R"({"name": "fig10", "k_max": 3})");
    expect_bad(R"({"name": "fig8", "sweep": {"variable": "v", "grid": [-10, 10]}})");
    for (const auto& f : figure_registry())
    {
        INFO(f.name);
        CHECK_NOTHROW(check_spec(f.defaults()));
    }
}

TEST_CASE("spec round-trips through its JSON form", "[spec]")
{
    const auto s = parse_spec(json::parse(R"({
        "name": "fig8",
        "config": {"n_tx": 4, "snr_db": 13, "block_len": 250, "uplink_eff_bits": 2.0},
        "schemes": ["analog", "qam64"],
        "sweep": {"variable": "v", "grid": [0, 30, 60]},
        "t_fb": 24, "seed": 9
    })"));
    const auto r = parse_spec(spec_to_json(s));
    CHECK(r.config.snr == Approx(s.config.snr).epsilon(1e-14));
    CHECK(r.config.block_len == s.config.block_len);
    CHECK(r.config.uplink_eff == Approx(s.config.uplink_eff).epsilon(1e-14));
    CHECK(r.sweep.grid == s.sweep.grid);
    CHECK(r.t_fb == 24.0);
    CHECK(r.seed == 9);
    REQUIRE(r.schemes.size() == 2);
    CHECK(r.schemes[1].qam_order == 64);
    CHECK(spec_to_json(r) == spec_to_json(s));
}

TEST_CASE("CSV writer uses header, LF and '.' decimals", "[csv]")
{
    ScratchDir dir("csv");
    Table t{"t", {"a", "b", "c"}, {{1.5, -2.25e-7, 1e12}, {0.1, 3.0, std::nan("")}}};
    const auto path = dir.path / "t.csv";

    // A comma-decimal locale must not leak into the output.
    const char* loc = std::setlocale(LC_NUMERIC, "de_DE.UTF-8");
    write_csv(t, path);
    std::setlocale(LC_NUMERIC, "C");
    if (!loc)
        WARN("de_DE locale unavailable; locale independence checked only in C locale");

    const auto text = slurp(path);
    CHECK(text.find('\r') == std::string::npos);
    CHECK(text.back() == '\n');
    const auto rows = parse_csv(text);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == std::vector<std::string>{"a", "b", "c"});
    for (std::size_t i = 1; i < rows.size(); ++i)
        CHECK(rows[i].size() == 3);
    CHECK(rows[1][0] == "1.5");
    CHECK(std::stod(rows[1][1]) == -2.25e-7);
    CHECK(std::stod(rows[1][2]) == 1e12);
    CHECK(rows[2][0] == "0.1");
    CHECK(rows[2][2] == "nan");

    Table bad{"bad", {"a", "b"}, {{1.0}}};
    CHECK_THROWS_AS(write_csv(bad, dir.path / "bad.csv"), std::logic_error);
}

TEST_CASE("format_number keeps ten significant digits", "[csv]")
{
    CHECK(format_number(1.0 / 3.0) == "0.3333333333");
    CHECK(format_number(200) == "200");
    CHECK(std::stod(format_number(std::numbers::pi)) == Approx(std::numbers::pi).epsilon(1e-9));
    CHECK(format_number(INFINITY) == "inf");
}

TEST_CASE("figure registry lists fig2 to fig11", "[registry]")
{
    const auto& reg = figure_registry();
    REQUIRE(reg.size() == 10);
    for (int i = 2; i <= 11; ++i)
        CHECK(find_figure("fig" + std::to_string(i)).name == "fig" + std::to_string(i));
    CHECK_THROWS_AS(find_figure("fig1"), spec_error);
    CHECK(find_figure("fig9").monte_carlo);
    CHECK_FALSE(find_figure("fig4").monte_carlo);
}

TEST_CASE("fig2 table matches the optimizer and reruns byte for byte", "[run]")
{
    ScratchDir dir("fig2");
    auto s = parse_spec(json::parse(R"({"name": "fig2", "sweep": {"variable": "T", "grid": [100, 200, 500]}})"));
    s.output = (dir.path / "a").string();
    const auto a = run_experiment(s);
    s.output = (dir.path / "b").string();
    const auto b = run_experiment(s);
    REQUIRE(a.files.size() == 1);
    CHECK(slurp(a.files[0]) == slurp(b.files[0]));

    const auto rows = parse_csv(slurp(a.files[0]));
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == std::vector<std::string>{"T", "t_tr_tdd", "t_tr_analog", "t_fb_analog", "t_tr_digital",
                                              "t_fb_digital", "t_tr_qam", "t_fb_qam", "qam_order_qam"});
    const auto cfg = s.config.with_block_len(200);
    const auto tdd = optimize(cfg, FeedbackScheme::tdd(4));
    const auto dig = optimize(cfg, FeedbackScheme::digital(4));
    CHECK(std::stod(rows[2][0]) == 200.0);
    CHECK(std::stod(rows[2][1]) == tdd.split.t_tr);
    CHECK(std::stod(rows[2][4]) == dig.split.t_tr);
    CHECK(std::stod(rows[2][5]) == dig.split.t_fb);
    CHECK(std::stod(rows[2][8]) == 4.0);

    const auto side = json::parse(slurp(a.sidecar));
    CHECK(a.sidecar.filename() == "fig2.json");
    CHECK(side.at("figure") == "fig2");
    CHECK(side.at("seed") == 1);
    CHECK(side.at("version") == std::string(version_string));
    CHECK(side.at("wall_clock_s").get<double>() >= 0.0);
    CHECK(side.at("files") == json::array({"fig2.csv"}));
    CHECK(side.at("threads").get<int>() >= 1);
    // The recorded spec reproduces the run.
    auto again = parse_spec(side.at("spec"));
    again.output = (dir.path / "c").string();
    CHECK(slurp(run_experiment(again).files[0]) == slurp(a.files[0]));
}

TEST_CASE("every analytic figure runs on a short grid", "[run]")
{
    ScratchDir dir("analytic");
    const std::map<std::string, json> grids{
        {"fig3", {{"variable", "T"}, {"grid", {100, 400}}}},
        {"fig4", {{"variable", "lambda"}, {"grid", {0.25, 0.5, 0.75}}}},
        {"fig5", {{"variable", "lambda"}, {"grid", {0.25, 0.5, 0.75}}}},
        {"fig6", {{"variable", "lambda"}, {"grid", {0.25, 0.5, 0.75}}}},
        {"fig7", {{"variable", "lambda"}, {"grid", {0.25, 0.5, 0.75}}}},
        {"fig8", {{"variable", "v"}, {"grid", {0, 40, 80}}}},
    };
    for (const auto& [name, sweep] : grids)
    {
        INFO(name);
        auto s = parse_spec(json{{"name", name}, {"sweep", sweep}});
        s.output = (dir.path / name).string();
        const auto out = run_experiment(s);
        REQUIRE_FALSE(out.files.empty());
        for (const auto& f : out.files)
        {
            INFO(f.string());
            const auto rows = parse_csv(slurp(f));
            REQUIRE(rows.size() >= 2);
            for (const auto& r : rows)
                CHECK(r.size() == rows[0].size());
            for (std::size_t i = 1; i < rows.size(); ++i)
                for (const auto& cell : rows[i])
                    CHECK(std::isfinite(std::stod(cell)));
        }
        CHECK(fs::exists(out.sidecar));
    }
}

TEST_CASE("Monte Carlo figures are reproducible and log summaries", "[run][mc]")
{
    ScratchDir dir("mc");
    auto s = parse_spec(json::parse(R"({"name": "fig3", "sweep": {"variable": "T", "grid": [100, 300]},
                                       "mc_blocks": 2000, "seed": 5})"));
    s.output = (dir.path / "a").string();
    const auto a = run_experiment(s);
    s.output = (dir.path / "b").string();
    const auto b = run_experiment(s);
    CHECK(slurp(a.files[0]) == slurp(b.files[0]));
    const auto log_a = slurp(dir.path / "a" / "fig3_mc.jsonl");
    CHECK(log_a == slurp(dir.path / "b" / "fig3_mc.jsonl"));

    std::istringstream lines(log_a);
    std::string line;
    int n = 0;
    while (std::getline(lines, line))
    {
        const auto rec = json::parse(line);
        CHECK(rec.contains("config_hash"));
        CHECK(rec.contains("seed"));
        CHECK(rec.contains("estimate"));
        CHECK(rec.contains("stderr"));
        CHECK(rec.at("stderr").get<double>() > 0.0);
        ++n;
    }
    CHECK(n == 2 * 4);

    // A different seed changes the estimates.
    s.seed = 6;
    s.output = (dir.path / "c").string();
    CHECK(slurp(run_experiment(s).files[0]) != slurp(a.files[0]));
}

TEST_CASE("thread count honours the environment override", "[run]")
{
    ::setenv("CSITOPT_THREADS", "3", 1);
    CHECK(thread_count() == 3);
    ::unsetenv("CSITOPT_THREADS");
    CHECK(thread_count() >= 1);
}

TEST_CASE("quick validation passes and detects inflated bounds", "[validate]")
{
    ValidationOptions o;
    o.quick = true;
    const auto rep = validate_bounds(o);
    for (const auto& c : rep.checks)
    {
        INFO(c.name << " " << c.params.dump() << " value " << c.value << " threshold " << c.threshold);
        CHECK(c.pass);
    }
    CHECK(rep.pass());
    const auto j = rep.to_json();
    CHECK(j.at("pass") == true);
    CHECK(j.at("checks").size() == rep.checks.size());

    // Lifting every bound by one nat breaks each lower-bound check whose slack was under one nat.
    ValidationReport inflated;
    o.bound_inflation = 1.0;
    check_lower_bounds(o, inflated);
    REQUIRE_FALSE(inflated.checks.empty());
    CHECK_FALSE(inflated.pass());
    int failed = 0, total = 0;
    for (const auto& c : inflated.checks)
        if (c.name == "lower_bound")
        {
            INFO(c.params.dump());
            ++total;
            failed += !c.pass;
            if (c.pass)
                CHECK(c.margin + o.bound_inflation >= 1.0);
        }
    CHECK(failed >= 0.9 * total);
}

TEST_CASE("quick validation verdicts do not depend on the seed", "[validate]")
{
    ValidationOptions o;
    o.quick = true;
    o.seed = 2;
    ValidationReport rep;
    check_lower_bounds(o, rep);
    check_quantizer_scaling(o, rep);
    CHECK(rep.pass());
}
