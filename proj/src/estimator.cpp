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

#include "simdoa/estimator.hpp"

#include <algorithm>
#include <cmath>

namespace simdoa
{
    void ProtocolConfig::validate() const
    {
        require(tx >= 1 && ty >= 1, "protocol: tx and ty must be >= 1");
    }

    namespace
    {
        // Lattice coordinate k in [0, N T) of receiver coordinate n and snapshot coordinate t.
        std::size_t lattice_coord(std::size_t n, std::size_t t, std::size_t tcount)
        {
            return (n - 1) * tcount + (t - 1);
        }

        // 2k/K reduced to [-1, 1).
        double lattice_angle(std::size_t k, std::size_t K)
        {
            const double v = 2.0 * static_cast<double>(k) / static_cast<double>(K);
            return v >= 1.0 ? v - 2.0 : v;
        }

        void check_input_grid(std::size_t n_inputs, std::size_t nx, std::size_t ny, const char *who)
        {
            if (nx * ny != n_inputs)
                throw StructuralError(std::string(who) + ": input grid " + std::to_string(nx) + "x" +
                                      std::to_string(ny) + " does not match " + std::to_string(n_inputs) +
                                      " inputs");
        }
    } // namespace

    double zeroth_layer_phase(std::size_t n, std::size_t t, std::size_t nx, std::size_t ny,
                              const ProtocolConfig &proto)
    {
        proto.validate();
        const auto gn = linear_to_grid(n, nx, ny);
        const auto gt = linear_to_grid(t, proto.tx, proto.ty);
        // Integer products are reduced before the division so large indices stay exact.
        const std::size_t kx = nx * proto.tx, ky = ny * proto.ty;
        const std::size_t px = ((gn.x - 1) * (gt.x - 1)) % kx;
        const std::size_t py = ((gn.y - 1) * (gt.y - 1)) % ky;
        return wrap_phase(-two_pi * static_cast<double>(px) / static_cast<double>(kx) -
                          two_pi * static_cast<double>(py) / static_cast<double>(ky));
    }

    ZerothLayerConfig zeroth_layer_config(std::size_t t, std::size_t nx, std::size_t ny, const ProtocolConfig &proto)
    {
        const std::size_t n_inputs = nx * ny;
        ZerothLayerConfig z{RVector(static_cast<Eigen::Index>(n_inputs))};
        for (std::size_t n = 1; n <= n_inputs; ++n)
            z.xi0(static_cast<Eigen::Index>(n - 1)) = zeroth_layer_phase(n, t, nx, ny, proto);
        return z;
    }

    EnergyMap collect_snapshots(const CMatrix &g, const CVector &steering, std::span<const cplx> symbols, double snr,
                                const ProtocolConfig &proto, std::size_t nx, std::size_t ny, const CMatrix &noise)
    {
        proto.validate();
        check_input_grid(static_cast<std::size_t>(g.cols()), nx, ny, "collect_snapshots");
        const std::size_t T = proto.total();
        if (steering.size() != g.cols())
            throw StructuralError("collect_snapshots: steering vector length must equal input count");
        if (noise.rows() != g.rows() || static_cast<std::size_t>(noise.cols()) != T)
            throw StructuralError("collect_snapshots: noise must be R x T");
        if (symbols.size() != 1 && symbols.size() != T)
            throw StructuralError("collect_snapshots: need one symbol or one per snapshot");
        require(snr >= 0.0, "collect_snapshots: snr must be >= 0");

        EnergyMap map{RMatrix(g.rows(), static_cast<Eigen::Index>(T))};
        for (std::size_t t = 1; t <= T; ++t)
        {
            const cplx s = symbols.size() == 1 ? symbols[0] : symbols[t - 1];
            const CVector r = synthesize_received(g, zeroth_layer_config(t, nx, ny, proto), steering, s, snr,
                                                  noise.col(static_cast<Eigen::Index>(t - 1)));
            map.values.col(static_cast<Eigen::Index>(t - 1)) = r.cwiseAbs2();
        }
        return map;
    }

    EnergyMap collect_snapshots(const CMatrix &g, const CVector &steering, std::span<const cplx> symbols, double snr,
                                const ProtocolConfig &proto, std::size_t nx, std::size_t ny, std::mt19937_64 &rng)
    {
        CMatrix noise(g.rows(), static_cast<Eigen::Index>(proto.total()));
        for (Eigen::Index t = 0; t < noise.cols(); ++t)
            noise.col(t) = cscg_vector(static_cast<std::size_t>(g.rows()), rng);
        return collect_snapshots(g, steering, symbols, snr, proto, nx, ny, noise);
    }

    RMatrix noiseless_energy(const CMatrix &g, const CVector &steering, cplx symbol, double snr,
                             const ProtocolConfig &proto, std::size_t nx, std::size_t ny)
    {
        const CMatrix zero = CMatrix::Zero(g.rows(), static_cast<Eigen::Index>(proto.total()));
        const cplx s[1] = {symbol};
        return collect_snapshots(g, steering, s, snr, proto, nx, ny, zero).values;
    }

    PeakIndex peak_index(const RMatrix &values)
    {
        if (values.size() == 0)
            throw DegenerateInputError("peak_index: empty energy map");
        PeakIndex best;
        double peak = -1.0;
        // Column-major scan with a strict comparison keeps the first maximum in (t, n) order.
        for (Eigen::Index t = 0; t < values.cols(); ++t)
            for (Eigen::Index n = 0; n < values.rows(); ++n)
                if (values(n, t) > peak)
                {
                    peak = values(n, t);
                    best = {static_cast<std::size_t>(n) + 1, static_cast<std::size_t>(t) + 1};
                }
        if (!(peak > 0.0))
            throw DegenerateInputError("peak_index: energy map has no positive entry");
        return best;
    }

    PeakIndex peak_index(const EnergyMap &map)
    {
        return peak_index(map.values);
    }

    ElectricalAngles electrical_angles(PeakIndex peak, std::size_t nx, std::size_t ny, const ProtocolConfig &proto)
    {
        proto.validate();
        const auto gn = linear_to_grid(peak.n, nx, ny);
        const auto gt = linear_to_grid(peak.t, proto.tx, proto.ty);
        return {lattice_angle(lattice_coord(gn.x, gt.x, proto.tx), nx * proto.tx),
                lattice_angle(lattice_coord(gn.y, gt.y, proto.ty), ny * proto.ty)};
    }

    PhysicalAngles physical_angles(ElectricalAngles psi, const SimGeometry &geom, bool clamp)
    {
        const double dx = geom.input.dx, dy = geom.input.dy;
        require(dx > 0.0 && dy > 0.0, "physical_angles: input spacing must be > 0");
        const double kappa = geom.wavenumber();
        const double px = pi * psi.x, py = pi * psi.y;
        const double arg = std::hypot(px / dx, py / dy) / kappa;

        PhysicalAngles out;
        out.azimuth = (px == 0.0 && py == 0.0) ? 0.0 : std::atan2(py * dx, px * dy);
        if (arg > 1.0 + 1e-12)
        {
            if (!clamp)
                throw UnrealizableAngleError("electrical angles (" + std::to_string(psi.x) + ", " +
                                             std::to_string(psi.y) + ") give sin(theta) = " + std::to_string(arg) +
                                             " > 1");
            out.realizable = false;
        }
        out.elevation = std::asin(std::min(arg, 1.0));
        return out;
    }

    ElectricalAngles electrical_from_physical(double azimuth, double elevation, const SimGeometry &geom)
    {
        const double k = geom.wavenumber() * std::sin(elevation) / pi;
        return {k * geom.input.dx * std::cos(azimuth), k * geom.input.dy * std::sin(azimuth)};
    }

    DoaEstimate estimate_doa(const EnergyMap &map, const ProtocolConfig &proto, const SimGeometry &geom)
    {
        DoaEstimate e;
        e.peak = peak_index(map);
        e.electrical = electrical_angles(e.peak, geom.receiver.nx, geom.receiver.ny, proto);
        e.physical = physical_angles(e.electrical, geom, true);
        return e;
    }

    std::pair<double, double> AngularSpectrum::peak_angles() const
    {
        Eigen::Index iy = 0, ix = 0;
        power.maxCoeff(&iy, &ix);
        return {psi_x(ix), psi_y(iy)};
    }

    AngularSpectrum angular_spectrum(const EnergyMap &map, const ProtocolConfig &proto, std::size_t nx, std::size_t ny)
    {
        proto.validate();
        if (static_cast<std::size_t>(map.values.rows()) != nx * ny ||
            static_cast<std::size_t>(map.values.cols()) != proto.total())
            throw StructuralError("angular_spectrum: energy map must be (nx*ny) x (tx*ty)");
        const std::size_t Kx = nx * proto.tx, Ky = ny * proto.ty;
        // Position of lattice coordinate k once the angles are sorted ascending.
        auto slot = [](std::size_t k, std::size_t K) { return (k + K / 2) % K; };

        AngularSpectrum s;
        s.psi_x.resize(static_cast<Eigen::Index>(Kx));
        s.psi_y.resize(static_cast<Eigen::Index>(Ky));
        for (std::size_t k = 0; k < Kx; ++k)
            s.psi_x(static_cast<Eigen::Index>(slot(k, Kx))) = lattice_angle(k, Kx);
        for (std::size_t k = 0; k < Ky; ++k)
            s.psi_y(static_cast<Eigen::Index>(slot(k, Ky))) = lattice_angle(k, Ky);

        s.power = RMatrix::Zero(static_cast<Eigen::Index>(Ky), static_cast<Eigen::Index>(Kx));
        for (std::size_t t = 1; t <= proto.total(); ++t)
        {
            const auto gt = linear_to_grid(t, proto.tx, proto.ty);
            for (std::size_t n = 1; n <= nx * ny; ++n)
            {
                const auto gn = linear_to_grid(n, nx, ny);
                const auto ix = slot(lattice_coord(gn.x, gt.x, proto.tx), Kx);
                const auto iy = slot(lattice_coord(gn.y, gt.y, proto.ty), Ky);
                s.power(static_cast<Eigen::Index>(iy), static_cast<Eigen::Index>(ix)) =
                    map.values(static_cast<Eigen::Index>(n - 1), static_cast<Eigen::Index>(t - 1));
            }
        }
        const double peak = s.power.maxCoeff();
        if (peak > 0.0)
            s.power /= peak;
        return s;
    }
} // namespace simdoa
