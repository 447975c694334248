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

#include <ostream>
#include <string>
#include <vector>

namespace simdoa
{
    // Stable exit-code contract of the command-line tool.
    enum ExitCode : int
    {
        exit_ok = 0,
        exit_runtime = 1, // numeric, I/O or other runtime failure
        exit_usage = 2    // bad arguments or configuration
    };

    // Environment variable that overrides the default output directory.
    inline constexpr const char *output_dir_env = "SIMDOA_OUTPUT_DIR";

    // Runs the `simdoa` command line in-process. args[0] is the program name.
    int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

    const char *version_string();
} // namespace simdoa
