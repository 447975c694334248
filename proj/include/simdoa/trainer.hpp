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
#include <cstdint>
#include <string>
#include <vector>

#include "simdoa/common.hpp"
#include "simdoa/geometry.hpp"
#include "simdoa/wave_model.hpp"

namespace simdoa
{
    // How the raw gradient is turned into a phase step.
    enum class GradientScaling
    {
        none,     // xi_l <- xi_l - eta * grad_l
        layer_max // grad_l rescaled so its largest component is pi before the step
    };

    std::string to_string(GradientScaling s);
    GradientScaling gradient_scaling_from_string(const std::string &s);

    // Gradient descent with exponentially decaying step size.
    struct TrainConfig
    {
        double eta0 = 0.2;          // initial learning rate
        double zeta = 0.8;          // learning-rate decay per iteration, in (0, 1]
        std::size_t max_iters = 200;
        double rel_tolerance = 0.0; // stop when (L_prev - L) / L_prev < tol; 0 disables
        std::uint64_t seed = 1;
        std::size_t restarts = 1;   // independent random initializations, best one kept
        GradientScaling scaling = GradientScaling::layer_max;

        void validate() const;
    };

    enum class StopReason
    {
        max_iterations,
        converged, // fractional reduction fell below rel_tolerance
        exact_fit  // loss reached exactly zero
    };

    std::string to_string(StopReason r);

    struct LossRecord
    {
        double loss = 0.0;
        double normalized_db = 0.0;
    };

    struct TrainReport
    {
        PhaseStack stack;                // lowest-loss iterate seen
        cplx beta{1.0, 0.0};             // optimal scale for `stack`
        std::vector<LossRecord> history; // initial loss + one entry per iteration
        std::size_t iterations = 0;
        std::size_t best_iteration = 0;  // index into history
        StopReason stop_reason = StopReason::max_iterations;
        std::uint64_t seed = 0;          // seed of the run that produced `stack`
        std::size_t restart = 0;

        double best_db() const { return history.at(best_iteration).normalized_db; }
        double best_loss() const { return history.at(best_iteration).loss; }
    };

    // Raised when the loss becomes non-finite; carries the history up to that point.
    class TrainingDivergedError : public Error
    {
    public:
        TrainingDivergedError(const std::string &msg, std::vector<LossRecord> history)
            : Error(msg), history_(std::move(history)) {}
        const std::vector<LossRecord> &history() const { return history_; }

    private:
        std::vector<LossRecord> history_;
    };

    // Field illuminating each layer from each input atom:
    //   q_{1,n} = w_{0,n},   q_{l+1,n} = W_l Y_l q_{l,n}.
    // Element l-1 of the result is the M x N matrix [q_{l,1} ... q_{l,N}].
    std::vector<CMatrix> layer_inputs(const PropagationSet &props, const PhaseStack &stack);

    // Analytic gradient of ||beta G - F||_F^2 with respect to every phase,
    // beta held fixed. Element l-1 is the length-M gradient of layer l.
    //
    // For layer l the loss depends on xi_l through g_n = B_l diag(q_{l,n}) v_l
    // with B_l = W_L Y_L ... Y_{l+1} W_l, so
    //   d/dxi_{l,m} = 2 sum_n Im{ beta^* conj(v_{l,m}) conj(q_{l,n,m}) [B_l^H (beta g_n - f_n)]_m }.
    // B_l is accumulated backwards from the receiver and shared across n.
    std::vector<RVector> gradient(const PropagationSet &props, const PhaseStack &stack, const CMatrix &f, cplx beta);

    // Central finite differences of fitting_loss for every phase (test oracle).
    std::vector<RVector> finite_diff_gradient(const PropagationSet &props, const PhaseStack &stack,
                                              const CMatrix &f, cplx beta, double step);

    // Phase step for one layer: -eta * grad, after the configured rescaling.
    RVector descent_step(const RVector &grad, double eta, GradientScaling scaling);

    // Single descent run from a given starting stack.
    TrainReport descend(const PropagationSet &props, const CMatrix &f, const TrainConfig &config, PhaseStack start);

    // Full training: `restarts` random initializations drawn from per-restart
    // streams of `seed`; returns the best run.
    TrainReport train(const PropagationSet &props, const CMatrix &f, const TrainConfig &config);

    // RNG stream for an independent work item, derived from (seed, a, b).
    std::mt19937_64 derive_stream(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0);

    struct GradCheckResult
    {
        double max_rel_error = 0.0; // max_k |analytic_k - numeric_k| / max_k |numeric_k|
        double cosine = 1.0;        // cosine similarity of the stacked gradients
    };

    GradCheckResult compare_gradients(const std::vector<RVector> &analytic, const std::vector<RVector> &numeric);
} // namespace simdoa
