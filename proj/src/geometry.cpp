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

#include "simdoa/geometry.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>

namespace simdoa
{
    namespace
    {
        void check_grid(const PlanarGrid &g, const std::string &name)
        {
            require(g.nx >= 1, name + ".nx must be >= 1");
            require(g.ny >= 1, name + ".ny must be >= 1");
            require(g.dx > 0.0 && std::isfinite(g.dx), name + ".dx must be > 0");
            require(g.dy > 0.0 && std::isfinite(g.dy), name + ".dy must be > 0");
        }

        // In-plane offset of element (ix, iy) from the grid center.
        inline double centered(std::size_t i, std::size_t count, double spacing)
        {
            return (static_cast<double>(i) - 0.5 * (1.0 + static_cast<double>(count))) * spacing;
        }

        struct Fnv1a
        {
            std::uint64_t state = 0xcbf29ce484222325ull;
            void add(std::uint64_t v)
            {
                for (int i = 0; i < 8; ++i)
                {
                    state ^= (v >> (8 * i)) & 0xffu;
                    state *= 0x100000001b3ull;
                }
            }
            void add(double v) { add(std::bit_cast<std::uint64_t>(v)); }
            void add(const PlanarGrid &g)
            {
                add(static_cast<std::uint64_t>(g.nx));
                add(static_cast<std::uint64_t>(g.ny));
                add(g.dx);
                add(g.dy);
            }
        };
    } // namespace

    void SimGeometry::validate() const
    {
        require(wavelength > 0.0 && std::isfinite(wavelength), "wavelength must be > 0");
        check_grid(input, "input");
        check_grid(layer, "layer");
        check_grid(receiver, "receiver");
        require(layers >= 1, "layers must be >= 1");
        require(thickness > 0.0 && std::isfinite(thickness), "thickness must be > 0");
        require(std::isfinite(receiver_rotation), "receiver_rotation must be finite");
    }

    std::string SimGeometry::hash() const
    {
        Fnv1a h;
        h.add(wavelength);
        h.add(input);
        h.add(layer);
        h.add(static_cast<std::uint64_t>(layers));
        h.add(thickness);
        h.add(receiver);
        h.add(receiver_rotation);
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h.state));
        return buf;
    }

    SimGeometry SimGeometry::square(std::size_t inputs_per_side, std::size_t atoms_per_side, std::size_t layers,
                                    double thickness_lambda, double spacing_lambda,
                                    double input_spacing_lambda, double wavelength)
    {
        SimGeometry g;
        g.wavelength = wavelength;
        g.input = {inputs_per_side, inputs_per_side, input_spacing_lambda * wavelength, input_spacing_lambda * wavelength};
        g.layer = {atoms_per_side, atoms_per_side, spacing_lambda * wavelength, spacing_lambda * wavelength};
        g.layers = layers;
        g.thickness = thickness_lambda * wavelength;
        g.receiver = g.input;
        g.receiver_rotation = 0.0;
        return g;
    }

    GridIndex linear_to_grid(std::size_t idx, std::size_t width, std::size_t height)
    {
        if (width == 0 || height == 0)
            throw ArgumentError("linear_to_grid: empty grid");
        if (idx < 1 || idx > width * height)
            throw ArgumentError("linear_to_grid: index " + std::to_string(idx) + " outside 1.." +
                                std::to_string(width * height));
        const std::size_t y = (idx + width - 1) / width;
        return {idx - (y - 1) * width, y};
    }

    std::size_t grid_to_linear(GridIndex g, std::size_t width, std::size_t height)
    {
        if (g.x < 1 || g.x > width || g.y < 1 || g.y > height)
            throw ArgumentError("grid_to_linear: coordinate outside grid");
        return (g.y - 1) * width + g.x;
    }

    double intra_sim_distance(std::size_t m, std::size_t m_other, const SimGeometry &geom)
    {
        const auto a = linear_to_grid(m, geom.layer.nx, geom.layer.ny);
        const auto b = linear_to_grid(m_other, geom.layer.nx, geom.layer.ny);
        const double ddx = (static_cast<double>(a.x) - static_cast<double>(b.x)) * geom.layer.dx;
        const double ddy = (static_cast<double>(a.y) - static_cast<double>(b.y)) * geom.layer.dy;
        const double gap = geom.layer_gap();
        return std::sqrt(ddx * ddx + ddy * ddy + gap * gap);
    }

    double input_to_first_distance(std::size_t m, std::size_t n, const SimGeometry &geom)
    {
        const auto a = linear_to_grid(m, geom.layer.nx, geom.layer.ny);
        const auto b = linear_to_grid(n, geom.input.nx, geom.input.ny);
        const double ddx = centered(a.x, geom.layer.nx, geom.layer.dx) - centered(b.x, geom.input.nx, geom.input.dx);
        const double ddy = centered(a.y, geom.layer.ny, geom.layer.dy) - centered(b.y, geom.input.ny, geom.input.dy);
        const double gap = geom.layer_gap();
        return std::sqrt(ddx * ddx + ddy * ddy + gap * gap);
    }

    double last_to_receiver_distance(std::size_t m, std::size_t r, const SimGeometry &geom)
    {
        const auto a = linear_to_grid(m, geom.layer.nx, geom.layer.ny);
        const auto b = linear_to_grid(r, geom.receiver.nx, geom.receiver.ny);
        const double px = centered(b.x, geom.receiver.nx, geom.receiver.dx);
        const double py = centered(b.y, geom.receiver.ny, geom.receiver.dy);
        const double c = std::cos(geom.receiver_rotation);
        const double s = std::sin(geom.receiver_rotation);
        const double ddx = centered(a.x, geom.layer.nx, geom.layer.dx) - (c * px - s * py);
        const double ddy = centered(a.y, geom.layer.ny, geom.layer.dy) - (s * px + c * py);
        const double gap = geom.layer_gap();
        return std::sqrt(ddx * ddx + ddy * ddy + gap * gap);
    }

    cplx rs_coefficient(double distance, double emit_area, const SimGeometry &geom)
    {
        if (!(distance > 0.0))
            throw ArgumentError("rs_coefficient: distance must be > 0");
        if (!(emit_area > 0.0))
            throw ArgumentError("rs_coefficient: emit_area must be > 0");
        const double k = geom.wavenumber();
        const double amplitude = emit_area * geom.layer_gap() / (two_pi * distance * distance * distance);
        return amplitude * cplx(1.0, -k * distance) * std::polar(1.0, k * distance);
    }

    const CMatrix &PropagationSet::hop(std::size_t l) const
    {
        if (l == 0)
            return w_input;
        if (l == layers)
            return w_receiver;
        if (l < layers)
            return w_inner;
        throw ArgumentError("PropagationSet::hop: layer index out of range");
    }

    PropagationSet build_propagation_matrices(const SimGeometry &geom)
    {
        geom.validate();
        const std::size_t N = geom.input_count();
        const std::size_t M = geom.atom_count();
        const std::size_t R = geom.receiver_count();

        // Boundary hops use the input-cell area so that W_L = W_0^T holds for
        // an isomorphic receiver; inner hops radiate from intermediate cells.
        const double boundary_area = geom.input.dx * geom.input.dy;
        const double inner_area = geom.layer.dx * geom.layer.dy;

        PropagationSet set;
        set.layers = geom.layers;
        set.w_input.resize(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(N));
        for (std::size_t m = 1; m <= M; ++m)
            for (std::size_t n = 1; n <= N; ++n)
                set.w_input(m - 1, n - 1) = rs_coefficient(input_to_first_distance(m, n, geom), boundary_area, geom);

        if (geom.layers > 1)
        {
            set.w_inner.resize(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(M));
            for (std::size_t m = 1; m <= M; ++m)
                for (std::size_t k = 1; k <= M; ++k)
                    set.w_inner(m - 1, k - 1) = rs_coefficient(intra_sim_distance(m, k, geom), inner_area, geom);
        }

        if (geom.receiver_isomorphic())
            set.w_receiver = set.w_input.transpose();
        else
        {
            set.w_receiver.resize(static_cast<Eigen::Index>(R), static_cast<Eigen::Index>(M));
            for (std::size_t r = 1; r <= R; ++r)
                for (std::size_t m = 1; m <= M; ++m)
                    set.w_receiver(r - 1, m - 1) =
                        rs_coefficient(last_to_receiver_distance(m, r, geom), boundary_area, geom);
        }
        return set;
    }

    SteeringVector steering_vector(double psi_x, double psi_y, std::size_t nx, std::size_t ny)
    {
        require(nx >= 1 && ny >= 1, "steering_vector: grid must be non-empty");
        SteeringVector sv;
        sv.psi_x = psi_x;
        sv.psi_y = psi_y;
        sv.entries.resize(static_cast<Eigen::Index>(nx * ny));
        for (std::size_t iy = 0; iy < ny; ++iy)
            for (std::size_t ix = 0; ix < nx; ++ix)
                sv.entries(static_cast<Eigen::Index>(iy * nx + ix)) =
                    std::polar(1.0, psi_x * static_cast<double>(ix) + psi_y * static_cast<double>(iy));
        return sv;
    }

    SteeringVector steering_vector_normalized(double psi_x_norm, double psi_y_norm, std::size_t nx, std::size_t ny)
    {
        return steering_vector(pi * psi_x_norm, pi * psi_y_norm, nx, ny);
    }

    DftTarget dft_matrix(std::size_t nx, std::size_t ny)
    {
        require(nx >= 1 && ny >= 1, "dft_matrix: grid must be non-empty");
        const std::size_t N = nx * ny;
        DftTarget t;
        t.nx = nx;
        t.ny = ny;
        t.matrix.resize(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
        for (std::size_t a = 0; a < N; ++a)
        {
            const std::size_t ax = a % nx, ay = a / nx;
            for (std::size_t b = 0; b < N; ++b)
            {
                const std::size_t bx = b % nx, by = b / nx;
                // Reduce the integer products first so large grids keep full phase accuracy.
                const double phase = -two_pi * (static_cast<double>((ax * bx) % nx) / static_cast<double>(nx) +
                                                static_cast<double>((ay * by) % ny) / static_cast<double>(ny));
                t.matrix(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = std::polar(1.0, phase);
            }
        }
        return t;
    }

    FeasibilityReport check_feasibility(const SimGeometry &geom)
    {
        FeasibilityReport r;
        r.atoms = geom.atom_count();
        r.inputs = geom.input_count();
        r.feasible = r.atoms >= r.inputs;
        if (!r.feasible)
            r.message = "M = " + std::to_string(r.atoms) + " < N = " + std::to_string(r.inputs) +
                        ": rank(G) <= M < N, zero fitting loss is unattainable";
        return r;
    }
} // namespace simdoa
