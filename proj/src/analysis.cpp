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

#include "simdoa/analysis.hpp"

#include <algorithm>
#include <cmath>

namespace simdoa
{
    void BoundInputs::validate() const
    {
        protocol.validate();
        require(snr >= 0.0 && std::isfinite(snr), "bound: snr must be finite and >= 0");
        if (static_cast<std::size_t>(g.cols()) != nx * ny || g.rows() != g.cols())
            throw StructuralError("bound: G must be N x N with N = nx * ny");
    }

    double q_function(double x)
    {
        return 0.5 * std::erfc(x / std::numbers::sqrt2);
    }

    RMatrix noncentrality_map(const BoundInputs &in)
    {
        in.validate();
        const auto a = steering_vector_normalized(in.psi_x, in.psi_y, in.nx, in.ny).entries;
        return 2.0 * noiseless_energy(in.g, a, in.symbol, in.snr, in.protocol, in.nx, in.ny);
    }

    double noncentrality(const BoundInputs &in, std::size_t n, std::size_t t)
    {
        in.validate();
        require(n >= 1 && n <= static_cast<std::size_t>(in.g.rows()), "noncentrality: n out of range");
        require(t >= 1 && t <= in.protocol.total(), "noncentrality: t out of range");
        const auto a = steering_vector_normalized(in.psi_x, in.psi_y, in.nx, in.ny).entries;
        const CVector x = zeroth_layer_config(t, in.nx, in.ny, in.protocol).transmission().cwiseProduct(a);
        const cplx inner = (in.g.row(static_cast<Eigen::Index>(n - 1)) * x).value();
        return std::norm(std::sqrt(2.0 * in.snr) * inner * in.symbol);
    }

    PeakIndex peak_index_noiseless(const BoundInputs &in)
    {
        return peak_index(noncentrality_map(in));
    }

    double MomentTriple::b() const
    {
        const double hh = h();
        return hh - mu1 * std::sqrt(hh / mu2);
    }

    MomentTriple moments(double delta_nt, double delta_peak)
    {
        require(delta_nt >= 0.0 && delta_peak >= 0.0, "moments: noncentralities must be >= 0");
        double mu[3];
        for (int i = 1; i <= 3; ++i)
        {
            const double sign = (i % 2 == 0) ? 1.0 : -1.0;
            mu[i - 1] = sign * (2.0 + i * delta_peak) + 2.0 + i * delta_nt;
        }
        return {mu[0], mu[1], mu[2]};
    }

    namespace
    {
        // Wilson-Hilferty: chi2_h / h is roughly normal after a cube root.
        double wilson_hilferty(double y, double h)
        {
            const double v = 2.0 / (9.0 * h);
            return (std::cbrt(y / h) - (1.0 - v)) / std::sqrt(v);
        }

        // Beyond this the fitted chi-square is indistinguishable from a normal.
        constexpr double max_dof = 1e10;
    } // namespace

    double detection_prob_bound(const MomentTriple &mt)
    {
        if (!(mt.mu2 > 0.0))
            return 1.0;
        double p;
        const double h = mt.mu3 != 0.0 ? mt.h() : std::numeric_limits<double>::infinity();
        if (!(h < max_dof))
        {
            // The difference has variance 2 mu2.
            p = q_function(-mt.mu1 / std::sqrt(2.0 * mt.mu2));
        }
        else if (mt.mu3 > 0.0)
        {
            p = q_function(wilson_hilferty(mt.b(), h));
        }
        else
        {
            // Fit -X instead: Pr{X >= 0} = Pr{chi2_h <= h + mu1 sqrt(h / mu2)}.
            const double y = h + mt.mu1 * std::sqrt(h / mt.mu2);
            p = q_function(-wilson_hilferty(y, h));
        }
        return std::clamp(p, 0.0, 1.0);
    }

    AxisPair mse_bound(const BoundInputs &in)
    {
        const RMatrix delta = noncentrality_map(in);
        // Tie rule of peak_index, but an all-zero map is allowed (rho = 0).
        PeakIndex peak;
        double best = -1.0;
        for (Eigen::Index t = 0; t < delta.cols(); ++t)
            for (Eigen::Index n = 0; n < delta.rows(); ++n)
                if (delta(n, t) > best)
                {
                    best = delta(n, t);
                    peak = {static_cast<std::size_t>(n) + 1, static_cast<std::size_t>(t) + 1};
                }
        const double dp = delta(static_cast<Eigen::Index>(peak.n - 1), static_cast<Eigen::Index>(peak.t - 1));

        AxisPair out;
        for (std::size_t t = 1; t <= in.protocol.total(); ++t)
            for (std::size_t n = 1; n <= static_cast<std::size_t>(delta.rows()); ++n)
            {
                const PeakIndex cell{n, t};
                const double p =
                    cell == peak ? 1.0
                                 : detection_prob_bound(moments(
                                       delta(static_cast<Eigen::Index>(n - 1), static_cast<Eigen::Index>(t - 1)), dp));
                if (p == 0.0)
                    continue;
                const auto e = electrical_angles(cell, in.nx, in.ny, in.protocol);
                const double ex = electrical_error(in.psi_x, e.x), ey = electrical_error(in.psi_y, e.y);
                out.x += p * ex * ex;
                out.y += p * ey * ey;
            }
        return out;
    }

    std::string to_string(SourceDistribution d)
    {
        switch (d)
        {
        case SourceDistribution::uniform_angles:
            return "uniform_angles";
        case SourceDistribution::uniform_solid_angle:
            return "uniform_solid_angle";
        case SourceDistribution::uniform_electrical:
            return "uniform_electrical";
        }
        return "unknown";
    }

    SourceDistribution source_distribution_from_string(const std::string &s)
    {
        if (s == "uniform_angles")
            return SourceDistribution::uniform_angles;
        if (s == "uniform_solid_angle")
            return SourceDistribution::uniform_solid_angle;
        if (s == "uniform_electrical")
            return SourceDistribution::uniform_electrical;
        throw ArgumentError("unknown source distribution '" + s +
                            "' (expected uniform_angles, uniform_solid_angle or uniform_electrical)");
    }

    double lattice_residual(double psi, double step)
    {
        return psi - step * std::nearbyint(psi / step);
    }

    AxisPair quantization_floor(std::size_t nx, std::size_t ny, const ProtocolConfig &proto, SourceDistribution dist,
                                double spacing_x_lambda, double spacing_y_lambda, std::size_t resolution)
    {
        proto.validate();
        require(nx >= 1 && ny >= 1, "quantization_floor: grid must be non-empty");
        require(resolution >= 16, "quantization_floor: resolution must be >= 16");
        const double step_x = 2.0 / static_cast<double>(nx * proto.tx);
        const double step_y = 2.0 / static_cast<double>(ny * proto.ty);
        const auto res = static_cast<double>(resolution);

        AxisPair out;
        if (dist == SourceDistribution::uniform_electrical)
        {
            // The axes are independent; a 1-D midpoint rule per axis suffices.
            for (std::size_t i = 0; i < resolution; ++i)
            {
                const double psi = -1.0 + 2.0 * (static_cast<double>(i) + 0.5) / res;
                const double ex = lattice_residual(psi, step_x), ey = lattice_residual(psi, step_y);
                out.x += ex * ex;
                out.y += ey * ey;
            }
            out.x /= res;
            out.y /= res;
            return out;
        }

        // Midpoint rule over (azimuth, u) where u is elevation or cos(elevation).
        const bool solid = dist == SourceDistribution::uniform_solid_angle;
        const std::size_t n_az = 2 * resolution;
        double weight = 0.0;
        for (std::size_t j = 0; j < resolution; ++j)
        {
            const double u = (static_cast<double>(j) + 0.5) / res;
            const double sin_el = solid ? std::sqrt(1.0 - u * u) : std::sin(u * pi / 2.0);
            for (std::size_t i = 0; i < n_az; ++i)
            {
                const double az = two_pi * (static_cast<double>(i) + 0.5) / static_cast<double>(n_az);
                const double px = 2.0 * spacing_x_lambda * sin_el * std::cos(az);
                const double py = 2.0 * spacing_y_lambda * sin_el * std::sin(az);
                const double ex = lattice_residual(px, step_x), ey = lattice_residual(py, step_y);
                out.x += ex * ex;
                out.y += ey * ey;
                weight += 1.0;
            }
        }
        out.x /= weight;
        out.y /= weight;
        return out;
    }
} // namespace simdoa
