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
#include <vector>

#include "simdoa/common.hpp"
#include "simdoa/geometry.hpp"

namespace simdoa
{
    // Phase shifts of the programmable layers 1..L, each a length-M vector.
    // Phases are kept reduced to [0, 2 pi).
    class PhaseStack
    {
    public:
        PhaseStack() = default;
        PhaseStack(std::size_t layers, std::size_t atoms);
        explicit PhaseStack(std::vector<RVector> phases);

        static PhaseStack random(std::size_t layers, std::size_t atoms, std::mt19937_64 &rng);

        std::size_t layers() const { return phases_.size(); }
        std::size_t atoms() const { return phases_.empty() ? 0 : static_cast<std::size_t>(phases_.front().size()); }

        // Phases of layer l (1-based, as in the layer numbering of the stack).
        const RVector &phases(std::size_t l) const { return phases_.at(l - 1); }
        void set_phases(std::size_t l, const RVector &xi);

        // Transmission coefficients exp(j xi_l) of layer l.
        CVector transmission(std::size_t l) const;

        // xi_l <- xi_l + delta (then wrapped).
        void shift(std::size_t l, const RVector &delta);
        void shift_one(std::size_t l, std::size_t m, double delta);

        bool operator==(const PhaseStack &) const = default;

    private:
        std::vector<RVector> phases_;
    };

    // Per-snapshot phase configuration of the input layer.
    struct ZerothLayerConfig
    {
        RVector xi0; // length N

        CVector transmission() const;
        static ZerothLayerConfig identity(std::size_t n) { return {RVector::Zero(static_cast<Eigen::Index>(n))}; }
    };

    struct SimResponse
    {
        CMatrix g; // R x N
        cplx beta{1.0, 0.0};
    };

    // G = W_L Y_L W_{L-1} ... Y_1 W_0, evaluated right-to-left.
    CMatrix forward_response(const PropagationSet &props, const PhaseStack &stack);

    // Least-squares scale beta = <vec G, vec F> / ||vec G||^2 minimizing ||beta G - F||_F.
    cplx optimal_scale(const CMatrix &g, const CMatrix &f);

    // Normalized loss reported for a perfect fit instead of -inf.
    inline constexpr double perfect_fit_db = -400.0;

    struct LossValue
    {
        double loss = 0.0;          // ||beta G - F||_F^2
        double normalized_db = 0.0; // 10 log10(loss / ||F||_F^2)
    };

    LossValue fitting_loss(const CMatrix &g, const CMatrix &f, cplx beta);

    // Converts a raw loss to the normalized dB scale used in reports.
    double normalized_db(double loss, double target_energy);

    // r = sqrt(rho) * G * Y_0 * a * s + u
    CVector synthesize_received(const CMatrix &g, const ZerothLayerConfig &zeroth, const CVector &steering,
                                cplx symbol, double snr, const CVector &noise);

    // Circularly symmetric complex Gaussian samples with unit variance
    // (independent real/imag parts of variance 1/2).
    CVector cscg_vector(std::size_t n, std::mt19937_64 &rng);
    cplx cscg_sample(std::mt19937_64 &rng);

    // Physical SNR rho that makes the SIM path see `effective_snr` (linear),
    // i.e. rho / |beta|^2 = effective_snr since G ~ F / beta.
    double snr_for_effective(double effective_snr, cplx beta);
    double effective_from_snr(double snr, cplx beta);

    inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
    inline double linear_to_db(double v) { return 10.0 * std::log10(v); }
} // namespace simdoa
