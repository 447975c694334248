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

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace simdoa
{
    using cplx = std::complex<double>;
    using CMatrix = Eigen::MatrixXcd;
    using CVector = Eigen::VectorXcd;
    using RMatrix = Eigen::MatrixXd;
    using RVector = Eigen::VectorXd;

    inline constexpr double pi = std::numbers::pi;
    inline constexpr double two_pi = 2.0 * std::numbers::pi;
    inline constexpr cplx imag_unit{0.0, 1.0};

    // Error categories. Everything derives from simdoa::Error so callers can
    // catch the whole family; the CLI maps categories onto exit codes.
    class Error : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // Invalid argument or index (out-of-range grid index, non-positive distance, ...).
    class ArgumentError : public Error
    {
    public:
        using Error::Error;
    };

    // Matrix/vector shapes do not line up.
    class StructuralError : public Error
    {
    public:
        using Error::Error;
    };

    // Input is well-formed but numerically degenerate (all-zero response, ...).
    class DegenerateInputError : public Error
    {
    public:
        using Error::Error;
    };

    // Estimated electrical angles do not map to a physical direction.
    class UnrealizableAngleError : public Error
    {
    public:
        using Error::Error;
    };

    class IoError : public Error
    {
    public:
        using Error::Error;
    };

    // Reduces an angle to [0, 2*pi).
    inline double wrap_phase(double phase)
    {
        double r = std::fmod(phase, two_pi);
        if (r < 0.0)
            r += two_pi;
        if (r >= two_pi) // fmod of a tiny negative number can round up to 2*pi
            r = 0.0;
        return r;
    }

    // Reduces a normalized electrical angle to [-1, 1).
    inline double wrap_normalized(double psi)
    {
        double r = std::fmod(psi + 1.0, 2.0);
        if (r < 0.0)
            r += 2.0;
        if (r >= 2.0)
            r = 0.0;
        return r - 1.0;
    }

    inline void require(bool condition, const std::string &message)
    {
        if (!condition)
            throw ArgumentError(message);
    }
} // namespace simdoa
