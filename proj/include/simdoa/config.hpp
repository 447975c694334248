// SPDX-License-Identifier: Apache-2.0
//
// simdoa - wave-domain DOA estimation with stacked intelligent metasurfaces
// Copyright (C) 2026 The simdoa authors
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

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "simdoa/common.hpp"
#include "simdoa/estimator.hpp"
#include "simdoa/experiments.hpp"
#include "simdoa/geometry.hpp"
#include "simdoa/trainer.hpp"

namespace simdoa
{
    // Base of all configuration failures.
    class ConfigError : public Error
    {
    public:
        using Error::Error;
    };

    // Line that is not `key = value`, or a value of the wrong type.
    class ConfigSyntaxError : public ConfigError
    {
    public:
        using ConfigError::ConfigError;
    };

    // Key the schema does not know.
    class ConfigUnknownKeyError : public ConfigError
    {
    public:
        using ConfigError::ConfigError;
    };

    // Well-formed value that violates a range or consistency rule.
    class ConfigValueError : public ConfigError
    {
    public:
        using ConfigError::ConfigError;
    };

    // Everything a subcommand can be configured with. Lengths in the file are
    // in wavelengths; `geometry` holds them converted to metres.
    struct RunConfig
    {
        SimGeometry geometry;
        TrainConfig train;
        ProtocolConfig protocol;

        // Single-source commands (spectrum, estimate).
        double psi_x = 0.0;
        double psi_y = 0.0;
        double snr_db = std::numeric_limits<double>::infinity(); // effective; inf = noiseless
        std::uint64_t noise_seed = 1;

        // Monte Carlo.
        McConfig montecarlo;

        // Sweeps.
        SweepSpec sweep;
        ReceiverStudySpec receiver_study;

        // Trained phase stack to load instead of training (relative paths are
        // resolved against the config file's directory).
        std::optional<std::filesystem::path> stack;

        // Keys exactly as written, for the run manifest.
        std::map<std::string, std::string> raw;
    };

    // Parses `key = value` lines; `#` starts a comment. Lists are
    // comma-separated. Throws IoError if the file cannot be read.
    RunConfig parse_config(const std::filesystem::path &path);
    // `overrides` are extra `key = value` strings that replace file entries.
    RunConfig parse_config_text(const std::string &text, const std::string &origin = "<config>",
                                const std::vector<std::string> &overrides = {});

    // Keys accepted by the parser, with one-line descriptions.
    const std::vector<std::pair<std::string, std::string>> &config_keys();
} // namespace simdoa
