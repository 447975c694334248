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

#include "simdoa/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

namespace simdoa
{
    void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)> &fn)
    {
        if (jobs == 0)
            jobs = std::max(1u, std::thread::hardware_concurrency());
        jobs = std::min(jobs, count);
        if (jobs <= 1)
        {
            for (std::size_t i = 0; i < count; ++i)
                fn(i);
            return;
        }
        std::atomic<std::size_t> next{0};
        std::atomic<bool> failed{false};
        std::exception_ptr error;
        std::mutex error_mutex;
        auto worker = [&] {
            for (std::size_t i = next++; i < count && !failed; i = next++)
            {
                try
                {
                    fn(i);
                }
                catch (...)
                {
                    std::lock_guard lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                    failed = true;
                }
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(jobs);
        for (std::size_t j = 0; j < jobs; ++j)
            pool.emplace_back(worker);
        for (auto &t : pool)
            t.join();
        if (error)
            std::rethrow_exception(error);
    }

    SourceTruth sample_source(std::mt19937_64 &rng, SourceDistribution dist, double spacing_x_lambda,
                              double spacing_y_lambda)
    {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        SourceTruth s;
        if (dist == SourceDistribution::uniform_electrical)
        {
            s.psi_x = 2.0 * unit(rng) - 1.0;
            s.psi_y = 2.0 * unit(rng) - 1.0;
            SimGeometry g;
            g.input = {1, 1, spacing_x_lambda * g.wavelength, spacing_y_lambda * g.wavelength};
            const auto phys = physical_angles({s.psi_x, s.psi_y}, g, true);
            s.azimuth = phys.azimuth;
            s.elevation = phys.elevation;
        }
        else
        {
            s.azimuth = two_pi * unit(rng);
            const double u = unit(rng);
            s.elevation = dist == SourceDistribution::uniform_solid_angle ? std::acos(u) : u * pi / 2.0;
            // kappa d sin(theta) cos(phi) / pi with d in wavelengths.
            s.psi_x = 2.0 * spacing_x_lambda * std::sin(s.elevation) * std::cos(s.azimuth);
            s.psi_y = 2.0 * spacing_y_lambda * std::sin(s.elevation) * std::sin(s.azimuth);
        }
        s.symbol = cscg_sample(rng);
        return s;
    }

    std::string to_string(EstimatorPath p)
    {
        return p == EstimatorPath::sim ? "sim" : "digital";
    }

    EstimatorPath estimator_path_from_string(const std::string &s)
    {
        if (s == "sim")
            return EstimatorPath::sim;
        if (s == "digital")
            return EstimatorPath::digital;
        throw ArgumentError("unknown estimator path '" + s + "' (expected sim or digital)");
    }

    void McConfig::validate() const
    {
        require(trials >= 1, "montecarlo: trials must be >= 1");
        require(!snr_db.empty(), "montecarlo: at least one SNR point is required");
        for (double v : snr_db)
            require(!std::isnan(v) && v != -std::numeric_limits<double>::infinity(),
                    "montecarlo: SNR values must be numbers or +inf");
        protocol.validate();
        require(nx >= 1 && ny >= 1, "montecarlo: array must be non-empty");
        require(spacing_x_lambda > 0.0 && spacing_y_lambda > 0.0, "montecarlo: spacing must be > 0");
    }

    namespace
    {
        CMatrix noise_matrix(std::size_t rows, std::size_t cols, std::mt19937_64 &rng)
        {
            CMatrix u(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
            for (Eigen::Index t = 0; t < u.cols(); ++t)
                u.col(t) = cscg_vector(rows, rng);
            return u;
        }

        // Stream tags; snapshot noise of SNR point k uses tag noise_tag + k.
        constexpr std::uint64_t source_tag = 0;
        constexpr std::uint64_t noise_tag = 1;

        struct Stats
        {
            double mean = 0.0;
            double se = 0.0;
        };

        Stats summarize(const std::vector<double> &v)
        {
            Stats s;
            const auto n = static_cast<double>(v.size());
            s.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
            if (v.size() > 1)
            {
                double ss = 0.0;
                for (double x : v)
                    ss += (x - s.mean) * (x - s.mean);
                s.se = std::sqrt(ss / (n - 1.0) / n);
            }
            return s;
        }
    } // namespace

    TrialOutcome run_trial(const McConfig &cfg, const SimResponse &response, std::size_t snr_index, std::size_t trial)
    {
        const std::size_t n_inputs = cfg.nx * cfg.ny;
        auto src_rng = derive_stream(cfg.seed, source_tag, trial);
        SourceTruth src;
        if (!cfg.fixed_sources.empty())
        {
            src = cfg.fixed_sources[trial % cfg.fixed_sources.size()];
            src.symbol = cscg_sample(src_rng);
        }
        else
            src = sample_source(src_rng, cfg.sources, cfg.spacing_x_lambda, cfg.spacing_y_lambda);

        const double gamma_db = cfg.snr_db.at(snr_index);
        const bool noiseless = std::isinf(gamma_db);
        const double gamma = noiseless ? 1.0 : db_to_linear(gamma_db);
        auto noise_rng = derive_stream(cfg.seed, noise_tag + snr_index, trial);
        const auto a = steering_vector_normalized(src.psi_x, src.psi_y, cfg.nx, cfg.ny).entries;
        const cplx sym[1] = {src.symbol};

        EnergyMap map;
        BoundInputs bi;
        bi.protocol = cfg.protocol;
        bi.nx = cfg.nx;
        bi.ny = cfg.ny;
        bi.psi_x = src.psi_x;
        bi.psi_y = src.psi_y;
        bi.symbol = src.symbol;
        if (cfg.path == EstimatorPath::sim)
        {
            if (static_cast<std::size_t>(response.g.cols()) != n_inputs || response.g.rows() != response.g.cols())
                throw StructuralError("montecarlo: SIM response must be N x N for the configured array");
            const double rho = snr_for_effective(gamma, response.beta);
            const CMatrix u = noiseless ? CMatrix::Zero(response.g.rows(), static_cast<Eigen::Index>(cfg.protocol.total()))
                                        : noise_matrix(n_inputs, cfg.protocol.total(), noise_rng);
            map = collect_snapshots(response.g, a, sym, rho, cfg.protocol, cfg.nx, cfg.ny, u);
            bi.g = response.g;
            bi.snr = rho;
        }
        else
        {
            const CMatrix w = noiseless ? CMatrix::Zero(static_cast<Eigen::Index>(n_inputs),
                                                        static_cast<Eigen::Index>(cfg.protocol.total()))
                                        : noise_matrix(n_inputs, cfg.protocol.total(), noise_rng);
            map = digital_snapshots(a, src.symbol, gamma, cfg.protocol, cfg.nx, cfg.ny, w);
            // F w has per-bin variance N, so the digital chain is the SIM chain
            // with G = F at SNR rho / N.
            bi.g = dft_matrix(cfg.nx, cfg.ny).matrix;
            bi.snr = gamma / static_cast<double>(n_inputs);
        }

        TrialOutcome out;
        out.peak = peak_index(map);
        out.estimate = electrical_angles(out.peak, cfg.nx, cfg.ny, cfg.protocol);
        out.err_x = electrical_error(src.psi_x, out.estimate.x);
        out.err_y = electrical_error(src.psi_y, out.estimate.y);
        if (cfg.with_bound)
        {
            if (noiseless)
            {
                // Without noise the decision is deterministic.
                out.bound_x = out.err_x * out.err_x;
                out.bound_y = out.err_y * out.err_y;
            }
            else
            {
                const auto b = mse_bound(bi);
                out.bound_x = b.x;
                out.bound_y = b.y;
            }
        }
        return out;
    }

    std::vector<McPoint> run_monte_carlo(const McConfig &cfg, const SimResponse &response)
    {
        cfg.validate();
        const std::size_t K = cfg.snr_db.size(), N = cfg.trials;
        std::vector<TrialOutcome> outcomes(K * N);
        parallel_for(K * N, cfg.jobs, [&](std::size_t i) { outcomes[i] = run_trial(cfg, response, i / N, i % N); });

        std::vector<McPoint> points;
        for (std::size_t k = 0; k < K; ++k)
        {
            std::vector<double> ex(N), ey(N), bx(N), by(N);
            for (std::size_t i = 0; i < N; ++i)
            {
                const auto &o = outcomes[k * N + i];
                ex[i] = o.err_x * o.err_x;
                ey[i] = o.err_y * o.err_y;
                bx[i] = o.bound_x;
                by[i] = o.bound_y;
            }
            McPoint p;
            p.snr_db = cfg.snr_db[k];
            const double gamma = std::isinf(p.snr_db) ? std::numeric_limits<double>::infinity() : db_to_linear(p.snr_db);
            p.snr = cfg.path == EstimatorPath::sim ? snr_for_effective(gamma, response.beta) : gamma;
            p.trials = N;
            const auto sx = summarize(ex), sy = summarize(ey), sbx = summarize(bx), sby = summarize(by);
            p.mse_x = sx.mean;
            p.se_x = sx.se;
            p.mse_y = sy.mean;
            p.se_y = sy.se;
            if (cfg.with_bound)
            {
                p.bound_x = sbx.mean;
                p.bound_se_x = sbx.se;
                p.bound_y = sby.mean;
                p.bound_se_y = sby.se;
            }
            p.low_trials = N < min_reliable_trials;
            points.push_back(p);
        }
        return points;
    }

    std::vector<McPoint> average_bound(const McConfig &cfg, const SimResponse &response)
    {
        McConfig c = cfg;
        c.validate();
        const std::size_t K = c.snr_db.size(), N = c.trials;
        std::vector<AxisPair> bounds(K * N);
        parallel_for(K * N, c.jobs, [&](std::size_t i) {
            const auto k = i / N, trial = i % N;
            auto src_rng = derive_stream(c.seed, source_tag, trial);
            SourceTruth src;
            if (!c.fixed_sources.empty())
            {
                src = c.fixed_sources[trial % c.fixed_sources.size()];
                src.symbol = cscg_sample(src_rng);
            }
            else
                src = sample_source(src_rng, c.sources, c.spacing_x_lambda, c.spacing_y_lambda);
            if (std::isinf(c.snr_db[k]))
                throw ArgumentError("bound: SNR points must be finite");
            const double gamma = db_to_linear(c.snr_db[k]);
            BoundInputs bi;
            bi.protocol = c.protocol;
            bi.nx = c.nx;
            bi.ny = c.ny;
            bi.psi_x = src.psi_x;
            bi.psi_y = src.psi_y;
            bi.symbol = src.symbol;
            if (c.path == EstimatorPath::sim)
            {
                bi.g = response.g;
                bi.snr = snr_for_effective(gamma, response.beta);
            }
            else
            {
                bi.g = dft_matrix(c.nx, c.ny).matrix;
                bi.snr = gamma / static_cast<double>(c.nx * c.ny);
            }
            bounds[i] = mse_bound(bi);
        });
        std::vector<McPoint> points;
        for (std::size_t k = 0; k < K; ++k)
        {
            std::vector<double> bx(N), by(N);
            for (std::size_t i = 0; i < N; ++i)
            {
                bx[i] = bounds[k * N + i].x;
                by[i] = bounds[k * N + i].y;
            }
            McPoint p;
            p.snr_db = c.snr_db[k];
            p.snr = c.path == EstimatorPath::sim ? snr_for_effective(db_to_linear(p.snr_db), response.beta)
                                                 : db_to_linear(p.snr_db);
            p.trials = N;
            const auto sx = summarize(bx), sy = summarize(by);
            p.bound_x = sx.mean;
            p.bound_se_x = sx.se;
            p.bound_y = sy.mean;
            p.bound_se_y = sy.se;
            p.low_trials = N < min_reliable_trials;
            points.push_back(p);
        }
        return points;
    }

    namespace
    {
        CMatrix dft1(std::size_t n)
        {
            CMatrix f(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
            for (std::size_t k = 0; k < n; ++k)
                for (std::size_t i = 0; i < n; ++i)
                    f(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) =
                        std::polar(1.0, -two_pi * static_cast<double>((k * i) % n) / static_cast<double>(n));
            return f;
        }
    } // namespace

    CVector apply_dft2(const CVector &x, std::size_t nx, std::size_t ny)
    {
        if (static_cast<std::size_t>(x.size()) != nx * ny)
            throw StructuralError("apply_dft2: vector length must be nx * ny");
        // Element n = (n_y - 1) nx + n_x, so the column-major nx x ny view has x fastest.
        const Eigen::Map<const CMatrix> grid(x.data(), static_cast<Eigen::Index>(nx), static_cast<Eigen::Index>(ny));
        const CMatrix y = dft1(nx) * grid * dft1(ny).transpose();
        return y.reshaped();
    }

    EnergyMap digital_snapshots(const CVector &steering, cplx symbol, double snr, const ProtocolConfig &proto,
                                std::size_t nx, std::size_t ny, const CMatrix &noise)
    {
        proto.validate();
        const auto n = static_cast<Eigen::Index>(nx * ny);
        if (steering.size() != n)
            throw StructuralError("digital_snapshots: steering vector length must be nx * ny");
        if (noise.rows() != n || static_cast<std::size_t>(noise.cols()) != proto.total())
            throw StructuralError("digital_snapshots: noise must be N x T");
        require(snr >= 0.0, "digital_snapshots: snr must be >= 0");
        EnergyMap map{RMatrix(n, static_cast<Eigen::Index>(proto.total()))};
        for (std::size_t t = 1; t <= proto.total(); ++t)
        {
            const CVector y = std::sqrt(snr) * symbol *
                                  zeroth_layer_config(t, nx, ny, proto).transmission().cwiseProduct(steering) +
                              noise.col(static_cast<Eigen::Index>(t - 1));
            map.values.col(static_cast<Eigen::Index>(t - 1)) = apply_dft2(y, nx, ny).cwiseAbs2();
        }
        return map;
    }

    DoaEstimate digital_baseline(const SourceTruth &source, const ProtocolConfig &proto, std::size_t nx,
                                 std::size_t ny, double snr, std::mt19937_64 &rng)
    {
        const auto a = steering_vector_normalized(source.psi_x, source.psi_y, nx, ny).entries;
        const CMatrix w = noise_matrix(nx * ny, proto.total(), rng);
        const auto map = digital_snapshots(a, source.symbol, snr, proto, nx, ny, w);
        SimGeometry g;
        g.input = {nx, ny, g.wavelength / 2.0, g.wavelength / 2.0};
        g.receiver = g.input;
        DoaEstimate e;
        e.peak = peak_index(map);
        e.electrical = electrical_angles(e.peak, nx, ny, proto);
        e.physical = physical_angles(e.electrical, g, true);
        return e;
    }

    std::vector<GradCheckInstance> gradcheck_suite(std::size_t instances, std::uint64_t seed, double step,
                                                   std::size_t jobs)
    {
        require(instances >= 1, "gradcheck: need at least one instance");
        std::vector<GradCheckInstance> out(instances);
        parallel_for(instances, jobs, [&](std::size_t i) {
            auto rng = derive_stream(seed, 0x67c, i);
            std::uniform_int_distribution<std::size_t> side(1, 2), atom_side(1, 3), layers(1, 3);
            std::uniform_real_distribution<double> thick(1.0, 6.0), spacing(0.3, 0.8);
            const std::size_t nx = side(rng), ny = side(rng);
            const std::size_t mx = atom_side(rng), my = atom_side(rng);
            SimGeometry g;
            g.input = {nx, ny, 0.5 * g.wavelength, 0.5 * g.wavelength};
            const double s = spacing(rng) * g.wavelength;
            g.layer = {mx, my, s, s};
            g.layers = layers(rng);
            g.thickness = thick(rng) * g.wavelength;
            g.receiver = g.input;
            const auto props = build_propagation_matrices(g);
            const auto stack = PhaseStack::random(g.layers, g.atom_count(), rng);
            const CMatrix f = dft_matrix(nx, ny).matrix;
            const CMatrix gm = forward_response(props, stack);
            // A perturbed scale keeps the residual away from the optimum.
            const cplx beta = optimal_scale(gm, f) * std::polar(1.3, 0.4);
            out[i].inputs = g.input_count();
            out[i].atoms = g.atom_count();
            out[i].layers = g.layers;
            out[i].result = compare_gradients(gradient(props, stack, f, beta),
                                              finite_diff_gradient(props, stack, f, beta, step));
        });
        return out;
    }

    std::uint64_t run_seed(std::uint64_t seed, std::size_t run)
    {
        auto rng = derive_stream(seed, 0x5eed, run);
        return rng();
    }

    namespace
    {
        template <class Cell>
        void finish_cell(Cell &c)
        {
            if (!c.valid || c.run_db.empty())
                return;
            c.mean_db = std::accumulate(c.run_db.begin(), c.run_db.end(), 0.0) / static_cast<double>(c.run_db.size());
            c.best_db = *std::min_element(c.run_db.begin(), c.run_db.end());
            c.worst_db = *std::max_element(c.run_db.begin(), c.run_db.end());
        }

        // Validates the geometry; returns an empty string when it can be trained.
        std::string check_cell(const SimGeometry &g)
        {
            try
            {
                g.validate();
            }
            catch (const Error &e)
            {
                return e.what();
            }
            const auto f = check_feasibility(g);
            return f.feasible ? std::string() : f.message;
        }

        // Trains every valid (cell, run) pair and stores the best normalized loss.
        template <class Cell>
        void train_cells(std::vector<Cell> &cells, const std::vector<SimGeometry> &geoms, const TrainConfig &train,
                         std::uint64_t seed, std::size_t runs, std::size_t jobs)
        {
            std::vector<std::size_t> valid;
            for (std::size_t c = 0; c < cells.size(); ++c)
                if (cells[c].valid)
                {
                    valid.push_back(c);
                    cells[c].run_db.assign(runs, 0.0);
                }
            std::vector<PropagationSet> props(cells.size());
            std::vector<CMatrix> targets(cells.size());
            parallel_for(valid.size(), jobs, [&](std::size_t i) {
                const auto c = valid[i];
                props[c] = build_propagation_matrices(geoms[c]);
                targets[c] = dft_matrix(geoms[c].input.nx, geoms[c].input.ny).matrix;
            });
            parallel_for(valid.size() * runs, jobs, [&](std::size_t i) {
                const auto c = valid[i / runs];
                const auto r = i % runs;
                TrainConfig cfg = train;
                cfg.seed = run_seed(seed, r);
                cells[c].run_db[r] = simdoa::train(props[c], targets[c], cfg).best_db();
            });
            for (auto &c : cells)
                finish_cell(c);
        }
    } // namespace

    void SweepSpec::validate() const
    {
        require(inputs_per_side >= 1, "sweep: inputs_per_side must be >= 1");
        require(!thickness_lambda.empty() && !layers.empty() && !atoms_per_side.empty() && !spacing_lambda.empty(),
                "sweep: every grid axis needs at least one value");
        require(runs >= 1, "sweep: runs must be >= 1");
        train.validate();
    }

    std::vector<SweepCell> ablation_sweep(const SweepSpec &spec)
    {
        spec.validate();
        std::vector<SweepCell> cells;
        std::vector<SimGeometry> geoms;
        for (double th : spec.thickness_lambda)
            for (std::size_t L : spec.layers)
                for (std::size_t side : spec.atoms_per_side)
                    for (double sp : spec.spacing_lambda)
                    {
                        SweepCell c;
                        c.thickness_lambda = th;
                        c.layers = L;
                        c.atoms = side * side;
                        c.spacing_lambda = sp;
                        SimGeometry g;
                        try
                        {
                            g = SimGeometry::square(spec.inputs_per_side, side, L, th, sp, spec.input_spacing_lambda);
                            c.message = check_cell(g);
                        }
                        catch (const Error &e)
                        {
                            c.message = e.what();
                        }
                        c.valid = c.message.empty();
                        cells.push_back(c);
                        geoms.push_back(g);
                    }
        train_cells(cells, geoms, spec.train, spec.seed, spec.runs, spec.jobs);
        return cells;
    }

    void ReceiverStudySpec::validate() const
    {
        require(inputs_per_side >= 1 && atoms_per_side >= 1, "receiver study: grid sizes must be >= 1");
        require(!layers.empty() && !receiver_spacing_lambda.empty() && !rotation_deg.empty(),
                "receiver study: every grid axis needs at least one value");
        require(runs >= 1, "receiver study: runs must be >= 1");
        train.validate();
    }

    SimGeometry receiver_study_geometry(const ReceiverStudySpec &spec, std::size_t layers, double receiver_spacing,
                                        double rotation_deg)
    {
        auto g = SimGeometry::square(spec.inputs_per_side, spec.atoms_per_side, layers, spec.thickness_lambda,
                                     spec.spacing_lambda, spec.input_spacing_lambda);
        g.receiver.dx = g.receiver.dy = receiver_spacing * g.wavelength;
        g.receiver_rotation = rotation_deg * pi / 180.0;
        return g;
    }

    std::vector<ReceiverCell> receiver_study(const ReceiverStudySpec &spec)
    {
        spec.validate();
        std::vector<ReceiverCell> cells;
        std::vector<SimGeometry> geoms;
        for (std::size_t L : spec.layers)
            for (double u : spec.receiver_spacing_lambda)
                for (double w : spec.rotation_deg)
                {
                    ReceiverCell c;
                    c.layers = L;
                    c.receiver_spacing_lambda = u;
                    c.rotation_deg = w;
                    SimGeometry g;
                    try
                    {
                        g = receiver_study_geometry(spec, L, u, w);
                        c.message = check_cell(g);
                    }
                    catch (const Error &e)
                    {
                        c.message = e.what();
                    }
                    c.valid = c.message.empty();
                    cells.push_back(c);
                    geoms.push_back(g);
                }
        train_cells(cells, geoms, spec.train, spec.seed, spec.runs, spec.jobs);
        return cells;
    }
} // namespace simdoa
