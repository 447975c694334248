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
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "simdoa/analysis.hpp"
#include "simdoa/common.hpp"
#include "simdoa/estimator.hpp"
#include "simdoa/geometry.hpp"
#include "simdoa/trainer.hpp"
#include "simdoa/wave_model.hpp"

namespace simdoa
{
    // Runs fn(i) for i in [0, count) on up to `jobs` threads (0 = hardware
    // concurrency). fn must only touch per-item state. The first exception
    // thrown by any item is rethrown after all workers stop.
    void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)> &fn);

    struct SourceTruth
    {
        double azimuth = 0.0;   // radians
        double elevation = 0.0; // radians
        double psi_x = 0.0;     // normalized electrical angles seen by the input array
        double psi_y = 0.0;
        cplx symbol{1.0, 0.0};
    };

    // Draws one source. `spacing_*_lambda` are the input-array spacings in
    // wavelengths. In uniform_electrical mode the physical angles are derived
    // from the drawn electrical angles, clamped at the horizon.
    SourceTruth sample_source(std::mt19937_64 &rng, SourceDistribution dist, double spacing_x_lambda = 0.5,
                              double spacing_y_lambda = 0.5);

    // Which receiver chain produces the energy map.
    enum class EstimatorPath
    {
        sim,    // wave-domain: sqrt(rho) G Y_0 a s + u, energy detection
        digital // noisy samples at the array, exact 2-D DFT applied digitally
    };

    std::string to_string(EstimatorPath p);
    EstimatorPath estimator_path_from_string(const std::string &s);

    struct McConfig
    {
        std::size_t trials = 1000;
        std::vector<double> snr_db{0.0, 10.0, 20.0, 30.0}; // effective SNR; +inf disables noise
        ProtocolConfig protocol;
        std::size_t nx = 2;
        std::size_t ny = 2;
        double spacing_x_lambda = 0.5;
        double spacing_y_lambda = 0.5;
        std::uint64_t seed = 1;
        SourceDistribution sources = SourceDistribution::uniform_angles;
        std::vector<SourceTruth> fixed_sources; // if non-empty, cycled in order instead of sampling
        EstimatorPath path = EstimatorPath::sim;
        bool with_bound = true;
        std::size_t jobs = 1;

        void validate() const;
    };

    // Aggregates below this trial count are flagged as statistically weak.
    inline constexpr std::size_t min_reliable_trials = 30;

    struct McPoint
    {
        double snr_db = 0.0;
        double snr = 0.0; // rho actually applied (sim path: gamma * |beta|^2)
        std::size_t trials = 0;
        double mse_x = 0.0, mse_y = 0.0;
        double se_x = 0.0, se_y = 0.0; // standard errors of the MSE estimates
        double bound_x = 0.0, bound_y = 0.0;
        double bound_se_x = 0.0, bound_se_y = 0.0;
        bool low_trials = false;
    };

    // Per-trial outcome, exposed for tests and for the CLI's raw dump.
    struct TrialOutcome
    {
        PeakIndex peak;
        ElectricalAngles estimate;
        double err_x = 0.0, err_y = 0.0;
        double bound_x = 0.0, bound_y = 0.0;
    };

    // Trial i at SNR index k. Sources (and symbols) depend only on (seed, i),
    // noise on (seed, k, i); results do not depend on the thread count.
    TrialOutcome run_trial(const McConfig &cfg, const SimResponse &response, std::size_t snr_index, std::size_t trial);

    // Monte Carlo MSE versus effective SNR. The response is ignored on the
    // digital path.
    std::vector<McPoint> run_monte_carlo(const McConfig &cfg, const SimResponse &response);

    // Analytic bound alone, averaged over the same source draws as
    // run_monte_carlo (no noise is simulated). One entry per SNR point.
    std::vector<McPoint> average_bound(const McConfig &cfg, const SimResponse &response);

    // y = F x for the nx*ny 2-D DFT, evaluated separably.
    CVector apply_dft2(const CVector &x, std::size_t nx, std::size_t ny);

    // Digital receiver energy map: |F (sqrt(rho) Y_{0,t} a s + w_t)|^2 with
    // w (N x T) the noise at the array elements.
    EnergyMap digital_snapshots(const CVector &steering, cplx symbol, double snr, const ProtocolConfig &proto,
                                std::size_t nx, std::size_t ny, const CMatrix &noise);

    // Digital beamforming baseline for one source. Physical angles assume a
    // half-wavelength array.
    DoaEstimate digital_baseline(const SourceTruth &source, const ProtocolConfig &proto, std::size_t nx,
                                 std::size_t ny, double snr, std::mt19937_64 &rng);

    // Ablation grid over SIM hardware parameters.
    struct SweepSpec
    {
        std::size_t inputs_per_side = 2;
        std::vector<double> thickness_lambda{9.0};
        std::vector<std::size_t> layers{7};
        std::vector<std::size_t> atoms_per_side{11};
        std::vector<double> spacing_lambda{0.5};
        double input_spacing_lambda = 0.5;
        std::size_t runs = 10;
        TrainConfig train;
        std::uint64_t seed = 1;
        std::size_t jobs = 1;

        void validate() const;
    };

    struct SweepCell
    {
        double thickness_lambda = 0.0;
        std::size_t layers = 0;
        std::size_t atoms = 0;
        double spacing_lambda = 0.0;
        bool valid = true;
        std::string message; // why the cell was skipped
        std::vector<double> run_db;
        double mean_db = 0.0;
        double best_db = 0.0;
        double worst_db = 0.0;
    };

    std::vector<SweepCell> ablation_sweep(const SweepSpec &spec);

    // Receiver spacing / rotation study on a fixed SIM.
    struct ReceiverStudySpec
    {
        std::size_t inputs_per_side = 2;
        double thickness_lambda = 9.0;
        std::vector<std::size_t> layers{1, 3, 7};
        std::size_t atoms_per_side = 11;
        double spacing_lambda = 0.5;
        double input_spacing_lambda = 0.5;
        std::vector<double> receiver_spacing_lambda{0.25, 0.5, 1.0};
        std::vector<double> rotation_deg{0.0};
        std::size_t runs = 10;
        TrainConfig train;
        std::uint64_t seed = 1;
        std::size_t jobs = 1;

        void validate() const;
    };

    struct ReceiverCell
    {
        std::size_t layers = 0;
        double receiver_spacing_lambda = 0.0;
        double rotation_deg = 0.0;
        bool valid = true;
        std::string message;
        std::vector<double> run_db;
        double mean_db = 0.0;
        double best_db = 0.0;
        double worst_db = 0.0;
    };

    SimGeometry receiver_study_geometry(const ReceiverStudySpec &spec, std::size_t layers, double receiver_spacing,
                                        double rotation_deg);

    std::vector<ReceiverCell> receiver_study(const ReceiverStudySpec &spec);

    // Gradient check on random small SIMs (N <= 4, M <= 9, L <= 3) against
    // central finite differences.
    struct GradCheckInstance
    {
        std::size_t inputs = 0, atoms = 0, layers = 0;
        GradCheckResult result;
    };

    std::vector<GradCheckInstance> gradcheck_suite(std::size_t instances, std::uint64_t seed, double step = 1e-5,
                                                   std::size_t jobs = 1);

    // Training seed of run r. Independent of the cell so every cell of a
    // sweep sees the same initializations.
    std::uint64_t run_seed(std::uint64_t seed, std::size_t run);
} // namespace simdoa
