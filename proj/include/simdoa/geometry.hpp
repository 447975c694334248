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

namespace simdoa
{
    // A rectangular grid of elements with uniform spacing (meters).
    struct PlanarGrid
    {
        std::size_t nx = 1;
        std::size_t ny = 1;
        double dx = 0.0;
        double dy = 0.0;

        std::size_t count() const { return nx * ny; }
        bool operator==(const PlanarGrid &) const = default;
    };

    // Physical layout of the metasurface stack and the receiver array.
    //
    // Layer 0 is the input layer (`input`, N atoms), layers 1..L are the
    // programmable intermediate layers (`layer`, M atoms each), and the
    // receiver array (`receiver`, R probes) sits one layer gap below layer L.
    // The receiver may be rotated in-plane by `receiver_rotation` radians
    // about its center.
    struct SimGeometry
    {
        double wavelength = 5e-3; // 60 GHz
        PlanarGrid input;
        PlanarGrid layer;
        std::size_t layers = 1; // L, excludes the input layer
        double thickness = 0.0; // T_SIM
        PlanarGrid receiver;
        double receiver_rotation = 0.0;

        std::size_t input_count() const { return input.count(); }
        std::size_t atom_count() const { return layer.count(); }
        std::size_t receiver_count() const { return receiver.count(); }
        double layer_gap() const { return thickness / static_cast<double>(layers); }
        double wavenumber() const { return two_pi / wavelength; }

        // True when the receiver repeats the input-layer grid with no rotation.
        bool receiver_isomorphic() const { return receiver == input && receiver_rotation == 0.0; }

        // Throws ArgumentError naming the offending field.
        void validate() const;

        // Stable textual fingerprint (hex FNV-1a over all fields).
        std::string hash() const;

        // Convenience constructor using wavelength-relative lengths, receiver
        // isomorphic to the input layer. `atoms_per_side` gives M = atoms_per_side^2.
        static SimGeometry square(std::size_t inputs_per_side, std::size_t atoms_per_side, std::size_t layers,
                                  double thickness_lambda, double spacing_lambda,
                                  double input_spacing_lambda = 0.5, double wavelength = 5e-3);
    };

    // 1-based grid coordinates.
    struct GridIndex
    {
        std::size_t x = 1;
        std::size_t y = 1;
        bool operator==(const GridIndex &) const = default;
    };

    // Row-major (x fastest) mapping of a 1-based linear index onto a grid of
    // the given width; y = ceil(idx / width), x = idx - (y - 1) * width.
    GridIndex linear_to_grid(std::size_t idx, std::size_t width, std::size_t height);
    std::size_t grid_to_linear(GridIndex g, std::size_t width, std::size_t height);

    // Distance between atom m on layer l and atom m_other on layer l + 1 (1-based).
    double intra_sim_distance(std::size_t m, std::size_t m_other, const SimGeometry &geom);

    // Distance between intermediate-layer atom m and input atom n, both grids
    // centered on the stack axis (1-based).
    double input_to_first_distance(std::size_t m, std::size_t n, const SimGeometry &geom);

    // Distance between last-layer atom m and receiver probe r (1-based); the
    // receiver grid is centered and rotated in-plane about its center.
    double last_to_receiver_distance(std::size_t m, std::size_t r, const SimGeometry &geom);

    // Rayleigh-Sommerfeld transmission coefficient between two cells
    //   (A * s_layer) / (2 pi d^3) * (1 - j k d) * exp(j k d)
    cplx rs_coefficient(double distance, double emit_area, const SimGeometry &geom);

    // Propagation matrices of the stack. All inter-layer hops share the same
    // geometry, so the M x M matrix is stored once and exposed per hop.
    struct PropagationSet
    {
        CMatrix w_input;    // W_0, M x N
        CMatrix w_inner;    // W_1 .. W_{L-1}, M x M (unused when L = 1)
        CMatrix w_receiver; // W_L, R x M
        std::size_t layers = 1;

        std::size_t input_count() const { return static_cast<std::size_t>(w_input.cols()); }
        std::size_t atom_count() const { return static_cast<std::size_t>(w_input.rows()); }
        std::size_t receiver_count() const { return static_cast<std::size_t>(w_receiver.rows()); }

        // W_l for l in [0, L].
        const CMatrix &hop(std::size_t l) const;
    };

    PropagationSet build_propagation_matrices(const SimGeometry &geom);

    // a(psi_x, psi_y) = a_y (x) a_x with [a_x]_k = exp(j psi_x (k - 1)).
    // Angles are in radians per element.
    struct SteeringVector
    {
        CVector entries;
        double psi_x = 0.0;
        double psi_y = 0.0;
    };

    SteeringVector steering_vector(double psi_x, double psi_y, std::size_t nx, std::size_t ny);

    // Steering vector from normalized electrical angles (units of pi rad/element).
    SteeringVector steering_vector_normalized(double psi_x_norm, double psi_y_norm, std::size_t nx, std::size_t ny);

    // 2D DFT matrix over an nx-by-ny grid, symmetric with unit-modulus entries.
    struct DftTarget
    {
        CMatrix matrix;
        std::size_t nx = 1;
        std::size_t ny = 1;
    };

    DftTarget dft_matrix(std::size_t nx, std::size_t ny);

    struct FeasibilityReport
    {
        std::size_t atoms = 0;  // M
        std::size_t inputs = 0; // N
        bool feasible = true;   // M >= N
        std::string message;
    };

    // Zero fitting loss needs rank(G) = N, and rank(G) <= M.
    FeasibilityReport check_feasibility(const SimGeometry &geom);
} // namespace simdoa
