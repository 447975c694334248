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

#include "simdoa/trainer.hpp"

#include <algorithm>
#include <cmath>

namespace simdoa
{
    void TrainConfig::validate() const
    {
        require(eta0 > 0.0 && std::isfinite(eta0), "eta0 must be > 0");
        require(zeta > 0.0 && zeta <= 1.0, "zeta must lie in (0, 1]");
        require(max_iters >= 1, "max_iters must be >= 1");
        require(rel_tolerance >= 0.0, "rel_tolerance must be >= 0");
        require(restarts >= 1, "restarts must be >= 1");
    }

    std::string to_string(StopReason r)
    {
        switch (r)
        {
        case StopReason::max_iterations:
            return "max_iterations";
        case StopReason::converged:
            return "converged";
        case StopReason::exact_fit:
            return "exact_fit";
        }
        return "unknown";
    }

    std::string to_string(GradientScaling s)
    {
        return s == GradientScaling::none ? "none" : "layer_max";
    }

    GradientScaling gradient_scaling_from_string(const std::string &s)
    {
        if (s == "none")
            return GradientScaling::none;
        if (s == "layer_max")
            return GradientScaling::layer_max;
        throw ArgumentError("unknown gradient scaling '" + s + "' (expected none or layer_max)");
    }

    RVector descent_step(const RVector &grad, double eta, GradientScaling scaling)
    {
        if (scaling == GradientScaling::none)
            return -eta * grad;
        const double peak = grad.size() > 0 ? grad.cwiseAbs().maxCoeff() : 0.0;
        if (!(peak > 0.0))
            return RVector::Zero(grad.size());
        return (-eta * pi / peak) * grad;
    }

    std::mt19937_64 derive_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b)
    {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                          static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
        return std::mt19937_64(seq);
    }

    namespace
    {
        void check_shapes(const PropagationSet &props, const PhaseStack &stack, const CMatrix &f)
        {
            if (stack.layers() != props.layers || stack.atoms() != props.atom_count())
                throw StructuralError("phase stack does not match the propagation set");
            if (static_cast<std::size_t>(f.rows()) != props.receiver_count() ||
                static_cast<std::size_t>(f.cols()) != props.input_count())
                throw StructuralError("target matrix must be R x N");
        }
    } // namespace

    std::vector<CMatrix> layer_inputs(const PropagationSet &props, const PhaseStack &stack)
    {
        if (stack.layers() != props.layers || stack.atoms() != props.atom_count())
            throw StructuralError("layer_inputs: phase stack does not match the propagation set");
        std::vector<CMatrix> q;
        q.reserve(props.layers);
        q.push_back(props.w_input);
        for (std::size_t l = 1; l < props.layers; ++l)
        {
            CMatrix next = q.back();
            next.array().colwise() *= stack.transmission(l).array();
            q.push_back(props.hop(l) * next);
        }
        return q;
    }

    std::vector<RVector> gradient(const PropagationSet &props, const PhaseStack &stack, const CMatrix &f, cplx beta)
    {
        check_shapes(props, stack, f);
        const std::size_t L = props.layers;

        std::vector<CVector> v(L);
        for (std::size_t l = 1; l <= L; ++l)
            v[l - 1] = stack.transmission(l);

        const auto q = layer_inputs(props, stack);
        CMatrix last = q.back();
        last.array().colwise() *= v[L - 1].array();
        const CMatrix residual = beta * (props.w_receiver * last) - f;

        std::vector<RVector> grad(L);
        CMatrix suffix = props.w_receiver; // B_L
        const cplx beta_conj = std::conj(beta);
        for (std::size_t l = L; l >= 1; --l)
        {
            const CMatrix back = suffix.adjoint() * residual; // M x N
            const auto &ql = q[l - 1];
            RVector g(static_cast<Eigen::Index>(props.atom_count()));
            for (Eigen::Index m = 0; m < g.size(); ++m)
            {
                cplx acc{0.0, 0.0};
                for (Eigen::Index n = 0; n < back.cols(); ++n)
                    acc += std::conj(ql(m, n)) * back(m, n);
                g(m) = 2.0 * (beta_conj * std::conj(v[l - 1](m)) * acc).imag();
            }
            grad[l - 1] = std::move(g);

            if (l > 1)
            {
                // B_{l-1} = B_l Y_l W_{l-1}
                suffix.array().rowwise() *= v[l - 1].array().transpose();
                suffix = suffix * props.hop(l - 1);
            }
        }
        return grad;
    }

    std::vector<RVector> finite_diff_gradient(const PropagationSet &props, const PhaseStack &stack,
                                              const CMatrix &f, cplx beta, double step)
    {
        require(step > 0.0, "finite_diff_gradient: step must be > 0");
        check_shapes(props, stack, f);
        std::vector<RVector> grad(stack.layers(), RVector::Zero(static_cast<Eigen::Index>(stack.atoms())));
        for (std::size_t l = 1; l <= stack.layers(); ++l)
        {
            for (std::size_t m = 0; m < stack.atoms(); ++m)
            {
                PhaseStack plus = stack, minus = stack;
                plus.shift_one(l, m, step);
                minus.shift_one(l, m, -step);
                const double lp = fitting_loss(forward_response(props, plus), f, beta).loss;
                const double lm = fitting_loss(forward_response(props, minus), f, beta).loss;
                grad[l - 1](static_cast<Eigen::Index>(m)) = (lp - lm) / (2.0 * step);
            }
        }
        return grad;
    }

    GradCheckResult compare_gradients(const std::vector<RVector> &analytic, const std::vector<RVector> &numeric)
    {
        if (analytic.size() != numeric.size())
            throw StructuralError("compare_gradients: layer count mismatch");
        double max_diff = 0.0, max_ref = 0.0, dot = 0.0, na = 0.0, nn = 0.0;
        for (std::size_t l = 0; l < analytic.size(); ++l)
        {
            if (analytic[l].size() != numeric[l].size())
                throw StructuralError("compare_gradients: atom count mismatch");
            max_diff = std::max(max_diff, (analytic[l] - numeric[l]).cwiseAbs().maxCoeff());
            max_ref = std::max(max_ref, numeric[l].cwiseAbs().maxCoeff());
            dot += analytic[l].dot(numeric[l]);
            na += analytic[l].squaredNorm();
            nn += numeric[l].squaredNorm();
        }
        GradCheckResult r;
        r.max_rel_error = max_ref > 0.0 ? max_diff / max_ref : max_diff;
        r.cosine = (na > 0.0 && nn > 0.0) ? dot / std::sqrt(na * nn) : (na == nn ? 1.0 : 0.0);
        return r;
    }

    TrainReport descend(const PropagationSet &props, const CMatrix &f, const TrainConfig &config, PhaseStack start)
    {
        config.validate();
        check_shapes(props, start, f);

        TrainReport report;
        PhaseStack stack = std::move(start);
        const double target_energy = f.squaredNorm();

        CMatrix g = forward_response(props, stack);
        cplx beta = optimal_scale(g, f);
        double loss = fitting_loss(g, f, beta).loss;
        report.history.push_back({loss, normalized_db(loss, target_energy)});
        report.stack = stack;
        report.beta = beta;

        double eta = config.eta0;
        for (std::size_t it = 1; it <= config.max_iters; ++it)
        {
            const auto grad = gradient(props, stack, f, beta);
            for (std::size_t l = 1; l <= stack.layers(); ++l)
                stack.shift(l, descent_step(grad[l - 1], eta, config.scaling));
            eta *= config.zeta;

            g = forward_response(props, stack);
            const double prev = loss;
            if (!(g.squaredNorm() > 0.0) || !g.allFinite())
                throw TrainingDivergedError("training diverged at iteration " + std::to_string(it), report.history);
            beta = optimal_scale(g, f);
            loss = fitting_loss(g, f, beta).loss;
            if (!std::isfinite(loss))
                throw TrainingDivergedError("training diverged at iteration " + std::to_string(it), report.history);

            report.history.push_back({loss, normalized_db(loss, target_energy)});
            report.iterations = it;
            if (loss < report.best_loss())
            {
                report.best_iteration = it;
                report.stack = stack;
                report.beta = beta;
            }
            if (loss == 0.0)
            {
                report.stop_reason = StopReason::exact_fit;
                break;
            }
            if (config.rel_tolerance > 0.0 && prev > 0.0 && (prev - loss) / prev < config.rel_tolerance)
            {
                report.stop_reason = StopReason::converged;
                break;
            }
        }
        return report;
    }

    TrainReport train(const PropagationSet &props, const CMatrix &f, const TrainConfig &config)
    {
        config.validate();
        TrainReport best;
        bool have_best = false;
        for (std::size_t r = 0; r < config.restarts; ++r)
        {
            auto rng = derive_stream(config.seed, r);
            auto report = descend(props, f, config, PhaseStack::random(props.layers, props.atom_count(), rng));
            report.seed = config.seed;
            report.restart = r;
            if (!have_best || report.best_loss() < best.best_loss())
            {
                best = std::move(report);
                have_best = true;
            }
        }
        return best;
    }
} // namespace simdoa
