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
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "simdoa/common.hpp"
#include "simdoa/geometry.hpp"
#include "simdoa/wave_model.hpp"

namespace simdoa
{
    // Snapshot schedule: T = tx * ty snapshots, t = (ty_idx - 1) * tx + tx_idx.
    struct ProtocolConfig
    {
        std::size_t tx = 1;
        std::size_t ty = 1;

        std::size_t total() const { return tx * ty; }
        void validate() const;
    };

    // |r_{n,t}|^2 for every receiver n (rows) and snapshot t (columns).
    struct EnergyMap
    {
        RMatrix values;
    };

    struct PeakIndex
    {
        std::size_t n = 1; // receiver, 1-based
        std::size_t t = 1; // snapshot, 1-based
        bool operator==(const PeakIndex &) const = default;
    };

    // Electrical angles normalized by pi, in [-1, 1).
    struct ElectricalAngles
    {
        double x = 0.0;
        double y = 0.0;
    };

    struct PhysicalAngles
    {
        double azimuth = 0.0;   // radians, four-quadrant; 0 at broadside
        double elevation = 0.0; // radians
        bool realizable = true; // false when the arcsin argument exceeded 1 and was clamped
    };

    struct DoaEstimate
    {
        PeakIndex peak;
        ElectricalAngles electrical;
        PhysicalAngles physical;
    };

    // xi_{0,n,t} = -2 pi (n_x - 1)(t_x - 1) / (N_x T_x) - 2 pi (n_y - 1)(t_y - 1) / (N_y T_y), mod 2 pi.
    double zeroth_layer_phase(std::size_t n, std::size_t t, std::size_t nx, std::size_t ny, const ProtocolConfig &proto);

    ZerothLayerConfig zeroth_layer_config(std::size_t t, std::size_t nx, std::size_t ny, const ProtocolConfig &proto);

    // Builds the energy map over T snapshots. `symbols` holds either one symbol
    // per snapshot or a single symbol reused for all of them; `noise` is R x T.
    EnergyMap collect_snapshots(const CMatrix &g, const CVector &steering, std::span<const cplx> symbols, double snr,
                                const ProtocolConfig &proto, std::size_t nx, std::size_t ny, const CMatrix &noise);

    // Same, drawing unit-variance CSCG noise from `rng`.
    EnergyMap collect_snapshots(const CMatrix &g, const CVector &steering, std::span<const cplx> symbols, double snr,
                                const ProtocolConfig &proto, std::size_t nx, std::size_t ny, std::mt19937_64 &rng);

    // Noiseless |sqrt(rho) G Y_{0,t} a s|^2 for every (n, t).
    RMatrix noiseless_energy(const CMatrix &g, const CVector &steering, cplx symbol, double snr,
                             const ProtocolConfig &proto, std::size_t nx, std::size_t ny);

    // Global argmax; ties go to the smallest t, then the smallest n.
    PeakIndex peak_index(const EnergyMap &map);
    PeakIndex peak_index(const RMatrix &values);

    ElectricalAngles electrical_angles(PeakIndex peak, std::size_t nx, std::size_t ny, const ProtocolConfig &proto);

    // Azimuth/elevation from normalized electrical angles (psi = pi * psi_norm
    // rad/element). Throws UnrealizableAngleError when the arcsin argument
    // exceeds 1, unless `clamp` is set, in which case elevation is pi/2 and
    // `realizable` is false. Azimuth at zenith is defined as 0.
    PhysicalAngles physical_angles(ElectricalAngles psi, const SimGeometry &geom, bool clamp = false);

    // Full decision from an energy map: peak, electrical and physical angles
    // (physical angles clamped and flagged when not realizable).
    // Inverse map: normalized electrical angles kappa d sin(theta) cos/sin(phi) / pi
    // seen by the input array for a plane wave from (azimuth, elevation).
    ElectricalAngles electrical_from_physical(double azimuth, double elevation, const SimGeometry &geom);

    DoaEstimate estimate_doa(const EnergyMap &map, const ProtocolConfig &proto, const SimGeometry &geom);

    // Energy map re-laid onto the (N_x T_x) x (N_y T_y) electrical-angle lattice.
    // power(iy, ix) corresponds to (psi_x[ix], psi_y[iy]); both axes ascend
    // from -1, and the peak is normalized to 1.
    struct AngularSpectrum
    {
        RVector psi_x;
        RVector psi_y;
        RMatrix power;

        std::pair<double, double> peak_angles() const;
    };

    AngularSpectrum angular_spectrum(const EnergyMap &map, const ProtocolConfig &proto, std::size_t nx, std::size_t ny);

    // Signed distance between two normalized electrical angles on the 2-periodic circle.
    inline double electrical_error(double truth, double estimate)
    {
        return wrap_normalized(truth - estimate);
    }
} // namespace simdoa
