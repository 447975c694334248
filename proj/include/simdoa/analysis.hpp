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
#include <string>

#include "simdoa/common.hpp"
#include "simdoa/estimator.hpp"

namespace simdoa
{
    // Everything the MSE bound depends on for one realized source.
    struct BoundInputs
    {
        CMatrix g;              // R x N SIM response (R = N)
        ProtocolConfig protocol;
        std::size_t nx = 1;     // input grid
        std::size_t ny = 1;
        double psi_x = 0.0;     // true normalized electrical angles
        double psi_y = 0.0;
        double snr = 0.0;       // linear rho
        cplx symbol{1.0, 0.0};

        void validate() const;
    };

    // Gaussian tail P(Z > x).
    double q_function(double x);

    // delta^2 = |sqrt(2 rho) g_n^H Y_{0,t} a s|^2 where g_n^H is row n of G (1-based n, t).
    double noncentrality(const BoundInputs &in, std::size_t n, std::size_t t);

    // delta^2 for every (n, t); equals twice the noiseless received energy.
    RMatrix noncentrality_map(const BoundInputs &in);

    // Cell with the largest noiseless energy (same tie rule as peak_index).
    PeakIndex peak_index_noiseless(const BoundInputs &in);

    // Cumulants of the difference X_nt - X_peak of two independent noncentral
    // chi-square(2) variables with noncentralities delta_nt and delta_peak.
    struct MomentTriple
    {
        double mu1 = 0.0;
        double mu2 = 0.0;
        double mu3 = 0.0;

        double h() const { return mu2 * mu2 * mu2 / (mu3 * mu3); }
        double b() const;
    };

    MomentTriple moments(double delta_nt, double delta_peak);

    // Approximate Pr{X_nt >= X_peak} via the three-moment chi-square fit and
    // the Wilson-Hilferty normal approximation. For mu3 < 0 the fit is applied
    // to -X. For a vanishing third cumulant the normal limit is used. Result
    // is clamped to [0, 1].
    double detection_prob_bound(const MomentTriple &mt);

    struct AxisPair
    {
        double x = 0.0;
        double y = 0.0;
    };

    // Upper bound on the per-axis squared error: sum over all (n, t) of
    // wrapped (psi_true - psi_hat_{n,t})^2 times the detection probability
    // bound; the noiseless peak cell counts with probability 1.
    AxisPair mse_bound(const BoundInputs &in);

    enum class SourceDistribution
    {
        uniform_angles,      // azimuth ~ U[0, 2 pi), elevation ~ U[0, pi/2]
        uniform_solid_angle, // uniform over the upper hemisphere
        uniform_electrical   // normalized electrical angles ~ U[-1, 1) per axis
    };

    std::string to_string(SourceDistribution d);
    SourceDistribution source_distribution_from_string(const std::string &s);

    // Expected squared distance from a random source to the nearest lattice
    // angle, per axis, by numerical integration over the source distribution.
    // Spacings are in wavelengths; `resolution` is the grid size per dimension.
    AxisPair quantization_floor(std::size_t nx, std::size_t ny, const ProtocolConfig &proto, SourceDistribution dist,
                                double spacing_x_lambda = 0.5, double spacing_y_lambda = 0.5,
                                std::size_t resolution = 2000);

    // Distance from psi to the nearest point of the lattice {k * step}, signed.
    double lattice_residual(double psi, double step);
} // namespace simdoa
