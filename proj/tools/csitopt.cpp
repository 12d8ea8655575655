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

// csitopt command line:
//   csitopt run <spec.json>
//   csitopt run --fig <name> [--seed N] [--out DIR]
//   csitopt validate [--quick] [--seed N] [--out FILE]
//   csitopt list
// Exit status: 0 ok, 1 spec or usage error, 2 validation failure.
// CSITOPT_THREADS overrides the worker count.

#include "csitopt/experiments.hpp"
#include "csitopt/validation.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace
{

constexpr int exit_ok = 0;
constexpr int exit_spec = 1;
constexpr int exit_validation = 2;

int cmd_run(const std::string& spec_file, const std::string& fig, std::optional<std::uint64_t> seed,
            const std::string& out, std::optional<std::size_t> blocks)
{
    using namespace csitopt;
    ExperimentSpec spec;
    if (!spec_file.empty())
    {
        std::ifstream in(spec_file);
        if (!in)
            throw spec_error("cannot open spec file " + spec_file);
        const auto j = nlohmann::json::parse(in, nullptr, false, true);
        if (j.is_discarded())
            throw spec_error(spec_file + ": not valid JSON");
        spec = parse_spec(j);
    }
    else
    {
        spec = find_figure(fig).defaults();
    }
    if (seed)
        spec.seed = *seed;
    if (!out.empty())
        spec.output = out;
    if (blocks)
        spec.mc_blocks = *blocks;
    const auto res = run_experiment(spec);
    for (const auto& f : res.files)
        std::cout << f.string() << '\n';
    std::cout << res.sidecar.string() << '\n';
    std::fprintf(stderr, "%s done in %.2f s\n", spec.name.c_str(), res.wall_clock_s);
    return exit_ok;
}

int cmd_validate(bool quick, std::uint64_t seed, double inflate, const std::string& out)
{
    csitopt::ValidationOptions o;
    o.quick = quick;
    o.seed = seed;
    o.bound_inflation = inflate;
    const auto rep = csitopt::validate_bounds(o);
    const auto text = rep.to_json().dump(2);
    std::cout << text << '\n';
    if (!out.empty())
    {
        std::ofstream f(out, std::ios::binary);
        if (!f)
            throw csitopt::spec_error("cannot write " + out);
        f << text << '\n';
    }
    return rep.pass() ? exit_ok : exit_validation;
}

int cmd_list()
{
    for (const auto& f : csitopt::figure_registry())
        std::printf("%-6s %-7s %s%s\n", f.name.c_str(), f.sweep_variable.c_str(), f.description.c_str(),
                    f.monte_carlo ? " [monte carlo]" : "");
    return exit_ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Training and feedback budgeting for the multiuser MIMO downlink"};
    app.set_version_flag("--version", std::string(csitopt::version_string));
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run a figure experiment from a spec file or by name");
    std::string spec_file, fig, out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> blocks;
    run->add_option("spec", spec_file, "JSON experiment spec");
    auto* fig_opt = run->add_option("--fig", fig, "registered figure name (see `list`)");
    run->add_option("--seed", seed, "random seed");
    run->add_option("--out", out, "output directory");
    run->add_option("--blocks", blocks, "Monte Carlo blocks per estimate");
    fig_opt->excludes(run->get_option("spec"));

    auto* val = app.add_subcommand("validate", "check closed-form bounds against simulation");
    bool quick = false;
    std::uint64_t vseed = 1;
    double inflate = 0.0;
    std::string report;
    val->add_flag("--quick", quick, "smaller grids and batches");
    val->add_option("--seed", vseed, "random seed");
    val->add_option("--inflate-bound", inflate, "add this many nats to every bound (harness self-test)");
    val->add_option("--out", report, "also write the JSON report here");

    app.add_subcommand("list", "list registered figures");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_spec;
    }

    try
    {
        if (run->parsed())
        {
            if (spec_file.empty() && fig.empty())
                throw csitopt::spec_error("run: give a spec file or --fig <name>");
            return cmd_run(spec_file, fig, seed, out, blocks);
        }
        if (val->parsed())
            return cmd_validate(quick, vseed, inflate, report);
        return cmd_list();
    }
    catch (const csitopt::spec_error& e)
    {
        std::fprintf(stderr, "spec error: %s\n", e.what());
        return exit_spec;
    }
    catch (const std::invalid_argument& e)
    {
        std::fprintf(stderr, "spec error: %s\n", e.what());
        return exit_spec;
    }
    catch (const std::exception& e)
    {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_spec;
    }
}
