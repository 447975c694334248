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

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "simdoa/common.hpp"
#include "simdoa/wave_model.hpp"

namespace simdoa
{
    // Complex matrices as CSV rows "row,col,re,im" (0-based indices, header line).
    // Values use 17 significant digits so a round trip is bit-exact.
    void write_matrix_csv(const std::filesystem::path &path, const CMatrix &m);
    CMatrix read_matrix_csv(const std::filesystem::path &path);

    // Binary dump: 8-byte magic "SIMDOAMX", u32 version, u64 rows, u64 cols,
    // then rows*cols (re, im) float64 pairs in column-major order, all little-endian.
    inline constexpr std::uint32_t matrix_format_version = 1;
    void write_matrix_binary(const std::filesystem::path &path, const CMatrix &m);
    CMatrix read_matrix_binary(const std::filesystem::path &path);

    // Phase stacks as CSV rows "layer,atom,phase" (1-based layer and atom).
    void write_stack_csv(const std::filesystem::path &path, const PhaseStack &s);
    PhaseStack read_stack_csv(const std::filesystem::path &path);

    // Binary: magic "SIMDOAPS", u32 version, u64 layers, u64 atoms, float64 phases layer by layer.
    void write_stack_binary(const std::filesystem::path &path, const PhaseStack &s);
    PhaseStack read_stack_binary(const std::filesystem::path &path);

    // Picks the format from the extension (.csv or .bin).
    void write_stack(const std::filesystem::path &path, const PhaseStack &s);
    PhaseStack read_stack(const std::filesystem::path &path);

    // Formats a double so that parsing it back yields the same value.
    std::string format_double(double v);

    struct ManifestOutput
    {
        std::string path;
        std::string kind;
        bool operator==(const ManifestOutput &) const = default;
    };

    // Provenance record written next to every run's artifacts.
    struct RunManifest
    {
        std::string tool = "simdoa";
        std::string version;
        std::string command;
        std::string started_utc;
        std::string finished_utc;
        std::map<std::string, std::string> config; // key -> value as given
        std::vector<std::uint64_t> seeds;
        std::string geometry_hash;
        std::map<std::string, std::string> notes;
        std::vector<ManifestOutput> outputs;

        bool operator==(const RunManifest &) const = default;

        std::string to_json() const;
        static RunManifest from_json(const std::string &text);
        void write(const std::filesystem::path &path) const;
        static RunManifest read(const std::filesystem::path &path);
    };

    // Current UTC time as ISO-8601 ("2026-01-02T03:04:05Z").
    std::string utc_timestamp();
} // namespace simdoa
