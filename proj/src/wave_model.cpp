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

#include "simdoa/wave_model.hpp"

#include <cmath>
#include <limits>

namespace simdoa
{
    PhaseStack::PhaseStack(std::size_t layers, std::size_t atoms)
        : phases_(layers, RVector::Zero(static_cast<Eigen::Index>(atoms)))
    {
    }

    PhaseStack::PhaseStack(std::vector<RVector> phases) : phases_(std::move(phases))
    {
        for (const auto &p : phases_)
            if (p.size() != phases_.front().size())
                throw StructuralError("PhaseStack: all layers must have the same atom count");
        for (auto &p : phases_)
            for (auto &v : p)
                v = wrap_phase(v);
    }

    PhaseStack PhaseStack::random(std::size_t layers, std::size_t atoms, std::mt19937_64 &rng)
    {
        std::uniform_real_distribution<double> u(0.0, two_pi);
        PhaseStack s(layers, atoms);
        for (auto &p : s.phases_)
            for (auto &v : p)
                v = u(rng);
        return s;
    }

    void PhaseStack::set_phases(std::size_t l, const RVector &xi)
    {
        auto &p = phases_.at(l - 1);
        if (xi.size() != p.size())
            throw StructuralError("PhaseStack::set_phases: length mismatch");
        p = xi.unaryExpr([](double v) { return wrap_phase(v); });
    }

    CVector PhaseStack::transmission(std::size_t l) const
    {
        const auto &p = phases(l);
        CVector t(p.size());
        for (Eigen::Index i = 0; i < p.size(); ++i)
            t(i) = std::polar(1.0, p(i));
        return t;
    }

    void PhaseStack::shift(std::size_t l, const RVector &delta)
    {
        auto &p = phases_.at(l - 1);
        if (delta.size() != p.size())
            throw StructuralError("PhaseStack::shift: length mismatch");
        for (Eigen::Index i = 0; i < p.size(); ++i)
            p(i) = wrap_phase(p(i) + delta(i));
    }

    void PhaseStack::shift_one(std::size_t l, std::size_t m, double delta)
    {
        auto &p = phases_.at(l - 1);
        p(static_cast<Eigen::Index>(m)) = wrap_phase(p(static_cast<Eigen::Index>(m)) + delta);
    }

    CVector ZerothLayerConfig::transmission() const
    {
        CVector t(xi0.size());
        for (Eigen::Index i = 0; i < xi0.size(); ++i)
            t(i) = std::polar(1.0, xi0(i));
        return t;
    }

    CMatrix forward_response(const PropagationSet &props, const PhaseStack &stack)
    {
        if (stack.layers() != props.layers)
            throw StructuralError("forward_response: phase stack has " + std::to_string(stack.layers()) +
                                  " layers, propagation set has " + std::to_string(props.layers));
        if (stack.atoms() != props.atom_count())
            throw StructuralError("forward_response: atom count mismatch");

        CMatrix x = props.w_input;
        for (std::size_t l = 1; l <= props.layers; ++l)
        {
            x.array().colwise() *= stack.transmission(l).array();
            x = props.hop(l) * x;
        }
        return x;
    }

    cplx optimal_scale(const CMatrix &g, const CMatrix &f)
    {
        if (g.rows() != f.rows() || g.cols() != f.cols())
            throw StructuralError("optimal_scale: G and F shapes differ");
        const double energy = g.squaredNorm();
        if (!(energy > 0.0))
            throw DegenerateInputError("optimal_scale: G is identically zero");
        // cdot conjugates its first argument: sum conj(g) * f = g^H f.
        return g.reshaped().dot(f.reshaped()) / energy;
    }

    double normalized_db(double loss, double target_energy)
    {
        if (loss <= 0.0)
            return perfect_fit_db;
        return std::max(perfect_fit_db, 10.0 * std::log10(loss / target_energy));
    }

    LossValue fitting_loss(const CMatrix &g, const CMatrix &f, cplx beta)
    {
        if (g.rows() != f.rows() || g.cols() != f.cols())
            throw StructuralError("fitting_loss: G and F shapes differ");
        LossValue v;
        v.loss = (beta * g - f).squaredNorm();
        v.normalized_db = normalized_db(v.loss, f.squaredNorm());
        return v;
    }

    CVector synthesize_received(const CMatrix &g, const ZerothLayerConfig &zeroth, const CVector &steering,
                                cplx symbol, double snr, const CVector &noise)
    {
        if (g.cols() != steering.size() || zeroth.xi0.size() != steering.size())
            throw StructuralError("synthesize_received: input dimension mismatch");
        if (noise.size() != g.rows())
            throw StructuralError("synthesize_received: noise length must equal receiver count");
        require(snr >= 0.0, "synthesize_received: snr must be >= 0");
        const CVector incident = zeroth.transmission().cwiseProduct(steering) * symbol;
        return std::sqrt(snr) * (g * incident) + noise;
    }

    cplx cscg_sample(std::mt19937_64 &rng)
    {
        std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
        const double re = nd(rng);
        const double im = nd(rng);
        return {re, im};
    }

    CVector cscg_vector(std::size_t n, std::mt19937_64 &rng)
    {
        CVector v(static_cast<Eigen::Index>(n));
        for (auto &x : v)
            x = cscg_sample(rng);
        return v;
    }

    double snr_for_effective(double effective_snr, cplx beta)
    {
        return effective_snr * std::norm(beta);
    }

    double effective_from_snr(double snr, cplx beta)
    {
        const double b2 = std::norm(beta);
        if (!(b2 > 0.0))
            throw DegenerateInputError("effective_from_snr: beta is zero");
        return snr / b2;
    }
} // namespace simdoa
