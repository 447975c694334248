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

#include "simdoa/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "simdoa/analysis.hpp"
#include "simdoa/config.hpp"
#include "simdoa/estimator.hpp"
#include "simdoa/experiments.hpp"
#include "simdoa/io.hpp"
#include "simdoa/trainer.hpp"

#ifndef SIMDOA_VERSION
#define SIMDOA_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;

namespace simdoa
{
    const char *version_string()
    {
        return SIMDOA_VERSION;
    }

    namespace
    {
        // Free text for a table cell: CSV-quoted, with embedded quotes doubled.
        std::string text_cell(const std::string &v)
        {
            std::string out = "\"";
            for (char ch : v)
                out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
            return out + "\"";
        }

        // Typed JSON value of a cell: quoted text stays text, finite numbers and
        // booleans become JSON numbers and booleans, anything else (inf) a string.
        nlohmann::ordered_json json_cell(const std::string &v)
        {
            if (v.size() >= 2 && v.front() == '"' && v.back() == '"')
            {
                std::string t;
                for (std::size_t i = 1; i + 1 < v.size(); ++i)
                {
                    t += v[i];
                    if (v[i] == '"')
                        ++i;
                }
                return t;
            }
            if (v == "true" || v == "false")
                return v == "true";
            double d = 0.0;
            const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
            if (ec == std::errc() && end == v.data() + v.size() && std::isfinite(d))
            {
                if (v.find_first_of(".eE") == std::string::npos && v.front() != '-')
                    return std::stoull(v);
                return d;
            }
            return v;
        }

        // Column-oriented table emitted as CSV or JSON.
        struct Table
        {
            std::vector<std::string> columns;
            std::vector<std::vector<std::string>> rows;

            void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }

            void write(const fs::path &path, const std::string &format) const
            {
                std::ofstream out(path);
                if (!out)
                    throw IoError("cannot open '" + path.string() + "' for writing");
                if (format == "json")
                {
                    nlohmann::ordered_json j = nlohmann::ordered_json::array();
                    for (const auto &r : rows)
                    {
                        nlohmann::ordered_json obj;
                        for (std::size_t c = 0; c < columns.size(); ++c)
                            obj[columns[c]] = json_cell(r[c]);
                        j.push_back(obj);
                    }
                    out << j.dump(2) << '\n';
                }
                else
                {
                    for (std::size_t c = 0; c < columns.size(); ++c)
                        out << (c ? "," : "") << columns[c];
                    out << '\n';
                    for (const auto &r : rows)
                    {
                        for (std::size_t c = 0; c < r.size(); ++c)
                            out << (c ? "," : "") << r[c];
                        out << '\n';
                    }
                }
                if (!out)
                    throw IoError("write failed: " + path.string());
            }
        };

        std::string num(double v)
        {
            return format_double(v);
        }

        std::string num(std::size_t v)
        {
            return std::to_string(v);
        }

        struct Common
        {
            std::string config_path;
            std::vector<std::string> overrides;
            std::string output_dir;
            std::string format = "csv";
            std::size_t jobs = 0;
        };

        // State shared by one invocation: configuration, output location, manifest.
        class Session
        {
        public:
            Session(const Common &c, std::string command, std::ostream &out) : common_(c), out_(out)
            {
                std::string text;
                std::string origin = "<defaults>";
                fs::path base = fs::current_path();
                if (!c.config_path.empty())
                {
                    std::ifstream in(c.config_path);
                    if (!in)
                        throw ConfigError("cannot read config file '" + c.config_path + "'");
                    std::stringstream ss;
                    ss << in.rdbuf();
                    text = ss.str();
                    origin = c.config_path;
                    base = fs::path(c.config_path).parent_path();
                }
                cfg_ = parse_config_text(text, origin, c.overrides);
                if (cfg_.stack && cfg_.stack->is_relative())
                    cfg_.stack = base / *cfg_.stack;
                cfg_.montecarlo.jobs = cfg_.sweep.jobs = cfg_.receiver_study.jobs = c.jobs;

                if (!c.output_dir.empty())
                    dir_ = c.output_dir;
                else if (const char *env = std::getenv(output_dir_env); env && *env)
                    dir_ = env;
                else
                    dir_ = "simdoa_output";
                fs::create_directories(dir_);

                manifest_.version = version_string();
                manifest_.command = std::move(command);
                manifest_.started_utc = utc_timestamp();
                manifest_.config = cfg_.raw;
                manifest_.geometry_hash = cfg_.geometry.hash();
                manifest_.notes["lengths"] = "config lengths are in wavelengths";
                manifest_.notes["effective_snr"] = "rho = gamma * |beta|^2";
            }

            const RunConfig &cfg() const { return cfg_; }
            RunManifest &manifest() { return manifest_; }
            std::ostream &out() { return out_; }
            const std::string &format() const { return common_.format; }

            fs::path output(const std::string &name, const std::string &kind)
            {
                const fs::path p = dir_ / name;
                manifest_.outputs.push_back({p.filename().string(), kind});
                return p;
            }

            std::string table_name(const std::string &stem) const
            {
                return stem + (common_.format == "json" ? ".json" : ".csv");
            }

            void finish()
            {
                manifest_.finished_utc = utc_timestamp();
                manifest_.outputs.push_back({"manifest.json", "manifest"});
                manifest_.write(dir_ / "manifest.json");
                out_ << "wrote " << manifest_.outputs.size() << " artifacts to " << dir_.string() << "\n";
            }

            // Trained (or loaded) SIM response for the configured geometry.
            SimResponse response(PhaseStack *stack_out = nullptr)
            {
                const auto props = build_propagation_matrices(cfg_.geometry);
                const CMatrix f = dft_matrix(cfg_.geometry.input.nx, cfg_.geometry.input.ny).matrix;
                PhaseStack stack;
                if (cfg_.stack)
                {
                    stack = read_stack(*cfg_.stack);
                    if (stack.layers() != cfg_.geometry.layers || stack.atoms() != cfg_.geometry.atom_count())
                        throw StructuralError("stack file '" + cfg_.stack->string() + "' has " +
                                              std::to_string(stack.layers()) + " x " + std::to_string(stack.atoms()) +
                                              " phases, geometry needs " + std::to_string(cfg_.geometry.layers) +
                                              " x " + std::to_string(cfg_.geometry.atom_count()));
                    manifest_.notes["stack"] = cfg_.stack->string();
                }
                else
                {
                    const auto report = train(props, f, cfg_.train);
                    stack = report.stack;
                    manifest_.seeds.push_back(cfg_.train.seed);
                    manifest_.notes["stack"] = "trained in-process";
                    manifest_.notes["fit_db"] = num(report.best_db());
                }
                SimResponse r;
                r.g = forward_response(props, stack);
                r.beta = optimal_scale(r.g, f);
                if (stack_out)
                    *stack_out = stack;
                return r;
            }

        private:
            Common common_;
            std::ostream &out_;
            RunConfig cfg_;
            fs::path dir_;
            RunManifest manifest_;
        };

        void require_isomorphic(const SimGeometry &g)
        {
            if (g.receiver.count() != g.input.count() || g.receiver.nx != g.input.nx)
                throw ConfigValueError("DOA estimation needs a receiver grid equal to the input grid");
        }

        int cmd_fit(Session &s)
        {
            const auto &cfg = s.cfg();
            const auto props = build_propagation_matrices(cfg.geometry);
            const auto feas = check_feasibility(cfg.geometry);
            if (!feas.feasible)
                s.out() << "warning: " << feas.message << "\n";
            const CMatrix f = dft_matrix(cfg.geometry.input.nx, cfg.geometry.input.ny).matrix;
            const auto report = train(props, f, cfg.train);

            write_stack_csv(s.output("stack.csv", "phase_stack_csv"), report.stack);
            write_stack_binary(s.output("stack.bin", "phase_stack_binary"), report.stack);
            const CMatrix g = forward_response(props, report.stack);
            write_matrix_csv(s.output("response.csv", "sim_response_csv"), g);
            write_matrix_binary(s.output("response.bin", "sim_response_binary"), g);

            Table hist{{"iteration", "loss", "normalized_db"}, {}};
            for (std::size_t i = 0; i < report.history.size(); ++i)
                hist.add({num(i), num(report.history[i].loss), num(report.history[i].normalized_db)});
            hist.write(s.output(s.table_name("loss_history"), "loss_history"), s.format());

            auto &m = s.manifest();
            m.seeds.push_back(report.seed);
            m.notes["best_db"] = num(report.best_db());
            m.notes["best_iteration"] = num(report.best_iteration);
            m.notes["restart"] = num(report.restart);
            m.notes["stop_reason"] = to_string(report.stop_reason);
            m.notes["beta"] = num(report.beta.real()) + (report.beta.imag() < 0 ? "" : "+") +
                              num(report.beta.imag()) + "j";
            s.out() << "best normalized loss " << std::fixed << std::setprecision(2) << report.best_db()
                    << " dB at iteration " << report.best_iteration << " (" << to_string(report.stop_reason) << ")\n";
            s.finish();
            return exit_ok;
        }

        EnergyMap single_source_map(Session &s, const SimResponse &r)
        {
            const auto &cfg = s.cfg();
            require_isomorphic(cfg.geometry);
            const auto nx = cfg.geometry.input.nx, ny = cfg.geometry.input.ny;
            const auto a = steering_vector_normalized(cfg.psi_x, cfg.psi_y, nx, ny).entries;
            const cplx sym[1] = {cplx(1.0, 0.0)};
            s.manifest().notes["symbol"] = "s = 1";
            if (std::isinf(cfg.snr_db))
            {
                s.manifest().notes["noise"] = "none";
                const CMatrix zero = CMatrix::Zero(r.g.rows(), static_cast<Eigen::Index>(cfg.protocol.total()));
                return collect_snapshots(r.g, a, sym, 1.0, cfg.protocol, nx, ny, zero);
            }
            auto rng = derive_stream(cfg.noise_seed);
            s.manifest().seeds.push_back(cfg.noise_seed);
            return collect_snapshots(r.g, a, sym, snr_for_effective(db_to_linear(cfg.snr_db), r.beta), cfg.protocol,
                                     nx, ny, rng);
        }

        int cmd_spectrum(Session &s)
        {
            const auto r = s.response();
            const auto map = single_source_map(s, r);
            const auto &cfg = s.cfg();
            const auto spec = angular_spectrum(map, cfg.protocol, cfg.geometry.input.nx, cfg.geometry.input.ny);
            Table t{{"psi_x", "psi_y", "power"}, {}};
            for (Eigen::Index iy = 0; iy < spec.power.rows(); ++iy)
                for (Eigen::Index ix = 0; ix < spec.power.cols(); ++ix)
                    t.add({num(spec.psi_x(ix)), num(spec.psi_y(iy)), num(spec.power(iy, ix))});
            t.write(s.output(s.table_name("spectrum"), "angular_spectrum"), s.format());
            const auto [px, py] = spec.peak_angles();
            s.out() << "spectrum peak at psi = (" << px << ", " << py << "), source at (" << cfg.psi_x << ", "
                    << cfg.psi_y << ")\n";
            s.finish();
            return exit_ok;
        }

        int cmd_estimate(Session &s)
        {
            const auto r = s.response();
            const auto map = single_source_map(s, r);
            const auto &cfg = s.cfg();
            const auto e = estimate_doa(map, cfg.protocol, cfg.geometry);
            nlohmann::ordered_json j;
            j["truth"] = {{"psi_x", cfg.psi_x}, {"psi_y", cfg.psi_y}};
            j["peak"] = {{"receiver", e.peak.n}, {"snapshot", e.peak.t}};
            j["electrical"] = {{"psi_x", e.electrical.x}, {"psi_y", e.electrical.y}};
            j["error"] = {{"psi_x", electrical_error(cfg.psi_x, e.electrical.x)},
                          {"psi_y", electrical_error(cfg.psi_y, e.electrical.y)}};
            j["physical"] = {{"azimuth_deg", e.physical.azimuth * 180.0 / pi},
                             {"elevation_deg", e.physical.elevation * 180.0 / pi},
                             {"realizable", e.physical.realizable}};
            const auto path = s.output("estimate.json", "doa_estimate");
            std::ofstream(path) << j.dump(2) << '\n';
            s.out() << "estimate psi = (" << e.electrical.x << ", " << e.electrical.y << "), azimuth "
                    << e.physical.azimuth * 180.0 / pi << " deg, elevation " << e.physical.elevation * 180.0 / pi
                    << " deg" << (e.physical.realizable ? "" : " (clamped)") << "\n";
            s.finish();
            return exit_ok;
        }

        McConfig mc_config(Session &s)
        {
            require_isomorphic(s.cfg().geometry);
            McConfig mc = s.cfg().montecarlo;
            s.manifest().seeds.push_back(mc.seed);
            s.manifest().notes["symbol_model"] = "one CSCG symbol per trial, held constant over the T snapshots";
            s.manifest().notes["sources"] = mc.fixed_sources.empty() ? to_string(mc.sources) : "fixed list";
            s.manifest().notes["path"] = to_string(mc.path);
            return mc;
        }

        int cmd_bound(Session &s)
        {
            const auto mc = mc_config(s);
            const auto r = s.response();
            const auto pts = average_bound(mc, r);
            Table t{{"effective_snr_db", "mse_x_bound", "mse_y_bound", "se_x", "se_y", "trials"}, {}};
            for (const auto &p : pts)
                t.add({num(p.snr_db), num(p.bound_x), num(p.bound_y), num(p.bound_se_x), num(p.bound_se_y),
                       num(p.trials)});
            t.write(s.output(s.table_name("bound"), "mse_bound"), s.format());
            for (const auto &p : pts)
                s.out() << p.snr_db << " dB: bound (" << p.bound_x << ", " << p.bound_y << ")\n";
            s.finish();
            return exit_ok;
        }

        int cmd_montecarlo(Session &s)
        {
            const auto mc = mc_config(s);
            const auto r = mc.path == EstimatorPath::sim ? s.response() : SimResponse{};
            const auto pts = run_monte_carlo(mc, r);
            Table t{{"effective_snr_db", "rho", "trials", "mse_x", "se_x", "mse_y", "se_y", "bound_x", "bound_se_x",
                     "bound_y", "bound_se_y", "low_trials"},
                    {}};
            for (const auto &p : pts)
                t.add({num(p.snr_db), num(p.snr), num(p.trials), num(p.mse_x), num(p.se_x), num(p.mse_y),
                       num(p.se_y), num(p.bound_x), num(p.bound_se_x), num(p.bound_y), num(p.bound_se_y),
                       p.low_trials ? "true" : "false"});
            t.write(s.output(s.table_name("montecarlo"), "monte_carlo"), s.format());
            for (const auto &p : pts)
                s.out() << p.snr_db << " dB: mse (" << p.mse_x << ", " << p.mse_y << ")"
                        << (mc.with_bound ? " bound (" + num(p.bound_x) + ", " + num(p.bound_y) + ")" : "")
                        << (p.low_trials ? " [fewer than 30 trials]" : "") << "\n";
            s.finish();
            return exit_ok;
        }

        int cmd_sweep(Session &s, const std::string &kind)
        {
            const auto &cfg = s.cfg();
            auto &m = s.manifest();
            m.notes["sweep"] = kind;
            m.seeds.push_back(kind == "receiver" ? cfg.receiver_study.seed : cfg.sweep.seed);
            if (kind == "receiver")
            {
                const auto cells = receiver_study(cfg.receiver_study);
                Table t{{"layers", "receiver_spacing_lambda", "rotation_deg", "valid", "mean_db", "best_db",
                         "worst_db", "runs", "message"},
                        {}};
                for (const auto &c : cells)
                    t.add({num(c.layers), num(c.receiver_spacing_lambda), num(c.rotation_deg),
                           c.valid ? "true" : "false", num(c.mean_db), num(c.best_db), num(c.worst_db),
                           num(c.run_db.size()), text_cell(c.message)});
                t.write(s.output(s.table_name("receiver_study"), "receiver_study"), s.format());
                for (const auto &c : cells)
                    s.out() << "L=" << c.layers << " u=" << c.receiver_spacing_lambda << " w=" << c.rotation_deg
                            << ": " << (c.valid ? num(c.mean_db) + " dB" : "skipped: " + c.message) << "\n";
            }
            else
            {
                const auto cells = ablation_sweep(cfg.sweep);
                Table t{{"t_sim_lambda", "layers", "atoms", "spacing_lambda", "valid", "mean_db", "best_db",
                         "worst_db", "runs", "message"},
                        {}};
                for (const auto &c : cells)
                    t.add({num(c.thickness_lambda), num(c.layers), num(c.atoms), num(c.spacing_lambda),
                           c.valid ? "true" : "false", num(c.mean_db), num(c.best_db), num(c.worst_db),
                           num(c.run_db.size()), text_cell(c.message)});
                t.write(s.output(s.table_name("sweep"), "ablation_sweep"), s.format());
                for (const auto &c : cells)
                    s.out() << "(" << c.thickness_lambda << "l, " << c.layers << ", " << c.atoms << ", "
                            << c.spacing_lambda << "l): "
                            << (c.valid ? num(c.mean_db) + " dB" : "skipped: " + c.message) << "\n";
            }
            s.finish();
            return exit_ok;
        }

        int cmd_gradcheck(std::ostream &out, std::size_t instances, std::uint64_t seed, double tol, std::size_t jobs)
        {
            const auto res = gradcheck_suite(instances, seed, 1e-5, jobs);
            double worst = 0.0, min_cos = 1.0;
            for (const auto &r : res)
            {
                worst = std::max(worst, r.result.max_rel_error);
                min_cos = std::min(min_cos, r.result.cosine);
            }
            out << "gradcheck: " << res.size() << " instances, max relative error " << std::scientific
                << std::setprecision(3) << worst << ", min cosine " << std::fixed << std::setprecision(12) << min_cos
                << "\n";
            if (worst > tol)
            {
                out << "gradcheck: FAILED (tolerance " << tol << ")\n";
                return exit_runtime;
            }
            return exit_ok;
        }
    } // namespace

    int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
    {
        CLI::App app{"simdoa: wave-domain 2-D DOA estimation with stacked intelligent metasurfaces", "simdoa"};
        app.set_version_flag("--version", std::string(version_string()));
        app.require_subcommand(1);

        Common common;
        auto add_common = [&](CLI::App *sub) {
            sub->add_option("-c,--config", common.config_path, "configuration file (key = value)");
            sub->add_option("--set", common.overrides, "override a config key, e.g. --set zeta=0.9");
            sub->add_option("-o,--output", common.output_dir,
                            std::string("output directory (default $") + output_dir_env + " or ./simdoa_output)");
            sub->add_option("--format", common.format, "table format")->check(CLI::IsMember({"csv", "json"}));
            sub->add_option("-j,--jobs", common.jobs, "worker threads (0 = all cores)");
        };

        auto *fit = app.add_subcommand("fit", "train the SIM phases to a 2-D DFT");
        auto *spectrum = app.add_subcommand("spectrum", "angular spectrum of one source");
        auto *estimate = app.add_subcommand("estimate", "DOA estimate of one source");
        auto *bound = app.add_subcommand("bound", "analytic MSE bound versus effective SNR");
        auto *montecarlo = app.add_subcommand("montecarlo", "Monte Carlo MSE versus effective SNR");
        auto *sweep = app.add_subcommand("sweep", "ablation grid or receiver-arrangement study");
        auto *gradcheck = app.add_subcommand("gradcheck", "analytic gradient versus finite differences");
        for (auto *sub : {fit, spectrum, estimate, bound, montecarlo, sweep})
            add_common(sub);

        std::string sweep_kind = "ablation";
        sweep->add_option("--kind", sweep_kind, "ablation or receiver")->check(CLI::IsMember({"ablation", "receiver"}));
        std::size_t gc_instances = 20, gc_jobs = 0;
        std::uint64_t gc_seed = 1;
        double gc_tol = 1e-6;
        gradcheck->add_option("--instances", gc_instances, "random SIM instances")->check(CLI::PositiveNumber);
        gradcheck->add_option("--seed", gc_seed, "instance seed");
        gradcheck->add_option("--tolerance", gc_tol, "maximum accepted relative error");
        gradcheck->add_option("-j,--jobs", gc_jobs, "worker threads (0 = all cores)");

        std::vector<std::string> argv_rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
        try
        {
            app.parse(argv_rev);
        }
        catch (const CLI::CallForHelp &)
        {
            out << app.help();
            return exit_ok;
        }
        catch (const CLI::CallForVersion &)
        {
            out << version_string() << "\n";
            return exit_ok;
        }
        catch (const CLI::ParseError &e)
        {
            err << "error: " << e.what() << "\n\n" << app.help();
            return exit_usage;
        }

        try
        {
            if (gradcheck->parsed())
                return cmd_gradcheck(out, gc_instances, gc_seed, gc_tol, gc_jobs);
            const auto *sub = app.get_subcommands().front();
            Session s(common, sub->get_name(), out);
            if (sub == fit)
                return cmd_fit(s);
            if (sub == spectrum)
                return cmd_spectrum(s);
            if (sub == estimate)
                return cmd_estimate(s);
            if (sub == bound)
                return cmd_bound(s);
            if (sub == montecarlo)
                return cmd_montecarlo(s);
            return cmd_sweep(s, sweep_kind);
        }
        catch (const ConfigError &e)
        {
            err << "config error: " << e.what() << "\n";
            return exit_usage;
        }
        catch (const ArgumentError &e)
        {
            err << "invalid argument: " << e.what() << "\n";
            return exit_usage;
        }
        catch (const std::exception &e)
        {
            err << "error: " << e.what() << "\n";
            return exit_runtime;
        }
    }
} // namespace simdoa
