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

#ifndef CSITOPT_MC_SUMMARY_HPP
#define CSITOPT_MC_SUMMARY_HPP

// One JSON object per line: {"config_hash", "seed", "estimate", "stderr", ...}.

#include "stats.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace csitopt::mc
{

inline std::uint64_t fnv1a64(std::string_view s)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s)
    {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

// Hash of the canonical (sorted-key, compact) JSON dump.
inline std::string config_hash(const nlohmann::json& config)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(config.dump())));
    return buf;
}

inline nlohmann::json summary_record(const nlohmann::json& config, std::uint64_t seed, const Estimate& e)
{
    nlohmann::json j;
    j["config_hash"] = config_hash(config);
    j["seed"] = seed;
    j["estimate"] = e.mean;
    j["stderr"] = e.std_error;
    j["samples"] = e.samples;
    j["config"] = config;
    return j;
}

inline void append_json_line(const std::string& path, const nlohmann::json& record)
{
    std::ofstream out(path, std::ios::app | std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open " + path + " for appending");
    out << record.dump() << '\n';
}

} // namespace csitopt::mc

#endif
