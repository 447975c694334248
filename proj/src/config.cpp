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

#include "simdoa/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace simdoa
{
    namespace
    {
        // Geometry values as written (wavelength units), assembled after parsing.
        struct Pending
        {
            double wavelength_mm = 5.0;
            std::size_t inputs_x = 2, inputs_y = 2;
            double input_spacing = 0.5;
            std::size_t atoms_x = 11, atoms_y = 11;
            double atom_spacing = 0.5;
            std::size_t layers = 7;
            double t_sim = 9.0;
            std::optional<std::size_t> receiver_x, receiver_y;
            std::optional<double> receiver_spacing;
            double receiver_rotation_deg = 0.0;
            std::optional<double> azimuth_deg, elevation_deg;
            bool psi_given = false;
            std::vector<std::pair<double, double>> fixed_psi;
        };

        struct Context
        {
            std::string origin;
            std::size_t line = 0;
            std::string key;

            std::string where() const { return origin + ":" + std::to_string(line) + ": key '" + key + "'"; }
            [[noreturn]] void syntax(const std::string &what) const { throw ConfigSyntaxError(where() + ": " + what); }
            [[noreturn]] void value(const std::string &what) const { throw ConfigValueError(where() + ": " + what); }
        };

        std::string trim(const std::string &s)
        {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos)
                return "";
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        }

        std::vector<std::string> split(const std::string &s, char sep)
        {
            std::vector<std::string> out;
            std::stringstream ss(s);
            std::string item;
            while (std::getline(ss, item, sep))
                out.push_back(trim(item));
            return out;
        }

        double real(const std::string &v, const Context &c)
        {
            if (v == "inf" || v == "+inf")
                return std::numeric_limits<double>::infinity();
            double x = 0.0;
            auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
            if (ec != std::errc() || p != v.data() + v.size() || v.empty())
                c.syntax("expected a number, got '" + v + "'");
            return x;
        }

        double finite(const std::string &v, const Context &c)
        {
            const double x = real(v, c);
            if (!std::isfinite(x))
                c.value("must be finite");
            return x;
        }

        double positive(const std::string &v, const Context &c)
        {
            const double x = finite(v, c);
            if (!(x > 0.0))
                c.value("must be > 0, got " + v);
            return x;
        }

        std::uint64_t unsigned_int(const std::string &v, const Context &c)
        {
            std::uint64_t x = 0;
            auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
            if (ec != std::errc() || p != v.data() + v.size() || v.empty())
                c.syntax("expected a non-negative integer, got '" + v + "'");
            return x;
        }

        std::size_t count(const std::string &v, const Context &c)
        {
            const auto x = unsigned_int(v, c);
            if (x == 0)
                c.value("must be >= 1");
            return static_cast<std::size_t>(x);
        }

        bool boolean(const std::string &v, const Context &c)
        {
            if (v == "true" || v == "yes" || v == "on" || v == "1")
                return true;
            if (v == "false" || v == "no" || v == "off" || v == "0")
                return false;
            c.syntax("expected true or false, got '" + v + "'");
        }

        template <class F>
        auto list(const std::string &v, const Context &c, F item)
        {
            std::vector<decltype(item(std::string(), c))> out;
            for (const auto &s : split(v, ','))
                out.push_back(item(s, c));
            if (out.empty())
                c.syntax("expected a comma-separated list");
            return out;
        }

        template <class F>
        auto wrap_enum(const std::string &v, const Context &c, F parse)
        {
            try
            {
                return parse(v);
            }
            catch (const ArgumentError &e)
            {
                c.value(e.what());
            }
        }

        using Handler = std::function<void(RunConfig &, Pending &, const std::string &, const Context &)>;

        struct KeySpec
        {
            std::string name;
            std::string help;
            Handler apply;
        };

        const std::vector<KeySpec> &schema()
        {
            static const std::vector<KeySpec> keys = {
                // geometry
                {"wavelength_mm", "carrier wavelength in millimetres (default 5, i.e. 60 GHz)",
                 [](RunConfig &, Pending &p, const std::string &v, const Context &c) { p.wavelength_mm = positive(v, c); }},
                {"inputs_x", "input-layer / receiver atoms along x (N_x)",
                 [](RunConfig &, Pending &p, const std::string &v, const Context &c) { p.inputs_x = count(v, c); }},
                {"inputs_y", "input-layer / receiver atoms along y (N_y)",
                 [](RunConfig &, Pending &p, const std::string &v, const Context &c) { p.inputs_y = count(v, c); }},
                {"input_spacing_lambda", "input-layer element spacing d, in wavelengths",
                 [](RunConfig &, Pending &p, const std::string &v, const Context &c) { p.input_spacing = positive(v, c); }},
                {"atoms_x", "meta-atoms per layer along x",
                 [](RunConfig &, Pending &p, const std::string &v, const Context &c) { p.atoms_x = count(v, c); }},
                {"atoms_y", "meta-atoms per layer along y",
                 [](RunConfig &, Pending &p, const std::string &v, const Context &c) { p.atoms_y = count(v, c); }},
                {"atom_spacing_lambda", "meta-atom spacing s, in wavelengths",
                 [](RunConfig &, Pending &p, const std::string &v, const Context &c) { p.atom_spacing = positive(v, c); }},
                {"layers", "number of programmable layers L",
                 [](RunConfig &, Pending &p, const std::string &v, const Context &c) { p.layers = count(v, c); }},
                {"t_sim_lambda", "SIM thickness, in wavelengths",
                 [](RunConfig &, Pending &p, const std::string &v, const Context &c) { p.t_sim = positive(v, c); }},
                {"receiver_x", "receiver elements along x (default inputs_x)",
                 [](RunConfig &, Pending &p, const std::string &v, const Context &c) { p.receiver_x = count(v, c); }},
                {"receiver_y", "receiver elements along y (default inputs_y)",
                 [](RunConfig &, Pending &p, const std::string &v, const Context &c) { p.receiver_y = count(v, c); }},
                {"receiver_spacing_lambda", "receiver element spacing u, in wavelengths (default input spacing)",
                 [](RunConfig &, Pending &p, const std::string &v, const Context &c) { p.receiver_spacing = positive(v, c); }},
                {"receiver_rotation_deg", "in-plane receiver rotation, degrees",
                 [](RunConfig &, Pending &p, const std::string &v, const Context &c) { p.receiver_rotation_deg = finite(v, c); }},
                // training
                {"eta0", "initial learning rate",
                 [](RunConfig &r, Pending &, const std::string &v, const Context &c) { r.train.eta0 = positive(v, c); }},
                {"zeta", "learning-rate decay per iteration, in (0, 1]",
                 [](RunConfig &r, Pending &, const std::string &v, const Context &c) {
                     const double z = positive(v, c);
                     if (z > 1.0)
                         c.value("must lie in (0, 1]");
                     r.train.zeta = z;
                 }},
                {"iterations", "gradient-descent iterations",
                 [](RunConfig &r, Pending &, const std::string &v, const Context &c) { r.train.max_iters = count(v, c); }},
                {"rel_tolerance", "early stop when the relative loss decrease falls below this (0 = off)",
                 [](RunConfig &r, Pending &, const std::string &v, const Context &c) {
                     const double t = finite(v, c);
                     if (t < 0.0)
                         c.value("must be >= 0");
                     r.train.rel_tolerance = t;
                 }},
                {"seed", "training seed",
                 [](RunConfig &r, Pending &, const std::string &v, const Context &c) { r.train.seed = unsigned_int(v, c); }},
                {"restarts", "random initializations per training, best kept",
                 [](RunConfig &r, Pending &, const std::string &v, const Context &c) { r.train.restarts = count(v, c); }},
                {"gradient_scaling", "layer_max (default) or none",
                 [](RunConfig &r, Pending &, const std::string &v, const Context &c) {
                     r.train.scaling = wrap_enum(v, c, gradient_scaling_from_string);
                 }},
                // protocol
                {"tx", "snapshots along x (T_x)",
                 [](RunConfig &r, Pending &, const std::string &v, const Context &c) { r.protocol.tx = count(v, c); }},
                {"ty", "snapshots along y (T_y)",
                 [](RunConfig &r, Pending &, const std::string &v, const Context &c) { r.protocol.ty = count(v, c); }},
                // single source
                {"psi_x", "source electrical angle along x, normalized by pi",
                 [](RunConfig &r, Pending &p, const std::string &v, const Context &c) {
                     r.psi_x = finite(v, c);
                     p.psi_given = true;
                 }},
                {"psi_y", "source electrical angle along y, normalized by pi",
                 [](RunConfig &r, Pending &p, const std::string &v, const Context &c) {
                     r.psi_y = finite(v, c);
                     p.psi_given = true;
                 }},
                {"azimuth_deg", "source azimuth in degrees (alternative to psi_x/psi_y)",
                 [](RunConfig &, Pending &p, const std::string &v, const Context &c) { p.azimuth_deg = finite(v, c); }},
                {"elevation_deg", "source elevation in degrees, 0..90",
                 [](RunConfig &, Pending &p, const std::string &v, const Context &c) {
                     const double e = finite(v, c);
                     if (e < 0.0 || e > 90.0)
                         c.value("must lie in [0, 90]");
                     p.elevation_deg = e;
                 }},
                {"snr_db", "effective SNR for spectrum/estimate, dB (inf = noiseless)",
                 [](RunConfig &r, Pending &, const std::string &v, const Context &c) {
                     const double s = real(v, c);
                     if (std::isnan(s) || s == -std::numeric_limits<double>::infinity())
                         c.value("must be a number or inf");
                     r.snr_db = s;
                 }},
                {"noise_seed", "noise seed for spectrum/estimate",
                 [](RunConfig &r, Pending &, const std::string &v, const Context &c) { r.noise_seed = unsigned_int(v, c); }},
                {"stack", "trained phase-stack file (.csv or .bin) to use instead of training",
                 [](RunConfig &r, Pending &, const std::string &v, const Context &c) {
                     if (v.empty())
                         c.value("must not be empty");
                     r.stack = v;
                 }},
                // Monte Carlo
                {"mc_trials", "Monte Carlo trials per SNR point",
                 [](RunConfig &r, Pending &, const std::string &v, const Context &c) { r.montecarlo.trials = count(v, c); }},
                {"mc_snr_db", "comma-separated effective SNR points, dB (inf allowed)",
                 [](RunConfig &r, Pending &, const std::string &v, const Context &c) {
                     r.montecarlo.snr_db = list(v, c, [](const std::string &s, const Context &cc) {
                         const double x = real(s, cc);
                         if (std::isnan(x) || x == -std::numeric_limits<double>::infinity())
                             cc.value("SNR values must be numbers or inf");
                         return x;
                     });
                 }},
                {"mc_seed", "Monte Carlo seed",
                 [](RunConfig &r, Pending &, const std::string &v, const Context &c) { r.montecarlo.seed = unsigned_int(v, c); }},
                {"mc_sources", "uniform_angles, uniform_solid_angle or uniform_electrical",
                 [](RunConfig &r, Pending &, const std::string &v, const Context &c) {
                     r.montecarlo.sources = wrap_enum(v, c, source_distribution_from_string);
                 }},
                {"mc_fixed_psi", "fixed source list 'x:y, x:y, ...' (normalized electrical angles)",
                 [](RunConfig &, Pending &p, const std::string &v, const Context &c) {
                     p.fixed_psi.clear();
                     for (const auto &item : split(v, ','))
                     {
                         const auto xy = split(item, ':');
                         if (xy.size() != 2)
                             c.syntax("expected entries of the form x:y, got '" + item + "'");
                         p.fixed_psi.emplace_back(finite(xy[0], c), finite(xy[1], c));
                     }
                 }},
                {"mc_path", "sim or digital",
                 [](RunConfig &r, Pending &, const std::string &v, const Context &c) {
                     r.montecarlo.path = wrap_enum(v, c, estimator_path_from_string);
                 }},
                {"mc_bound", "also evaluate the analytic MSE bound (true/false)",
                 [](RunConfig &r, Pending &, const std::string &v, const Context &c) { r.montecarlo.with_bound = boolean(v, c); }},
                // ablation sweep
                {"sweep_t_sim_lambda", "thickness grid, wavelengths",
                 [](RunConfig &r, Pending &, const std::string &v, const Context &c) { r.sweep.thickness_lambda = list(v, c, positive); }},
                {"sweep_layers", "layer-count grid",
                 [](RunConfig &r, Pending &, const std::string &v, const Context &c) { r.sweep.layers = list(v, c, count); }},
                {"sweep_atoms_per_side", "sqrt(M) grid",
                 [](RunConfig &r, Pending &, const std::string &v, const Context &c) { r.sweep.atoms_per_side = list(v, c, count); }},
                {"sweep_spacing_lambda", "meta-atom spacing grid, wavelengths",
                 [](RunConfig &r, Pending &, const std::string &v, const Context &c) { r.sweep.spacing_lambda = list(v, c, positive); }},
                {"sweep_runs", "training runs per cell (sweep and receiver study)",
                 [](RunConfig &r, Pending &, const std::string &v, const Context &c) {
                     r.sweep.runs = count(v, c);
                     r.receiver_study.runs = r.sweep.runs;
                 }},
                {"sweep_seed", "base seed of the per-run training seeds",
                 [](RunConfig &r, Pending &, const std::string &v, const Context &c) {
                     r.sweep.seed = unsigned_int(v, c);
                     r.receiver_study.seed = r.sweep.seed;
                 }},
                // receiver study
                {"rx_layers", "layer counts for the receiver study",
                 [](RunConfig &r, Pending &, const std::string &v, const Context &c) { r.receiver_study.layers = list(v, c, count); }},
                {"rx_spacing_lambda", "receiver spacings for the receiver study, wavelengths",
                 [](RunConfig &r, Pending &, const std::string &v, const Context &c) {
                     r.receiver_study.receiver_spacing_lambda = list(v, c, positive);
                 }},
                {"rx_rotation_deg", "receiver rotations for the receiver study, degrees",
                 [](RunConfig &r, Pending &, const std::string &v, const Context &c) {
                     r.receiver_study.rotation_deg = list(v, c, finite);
                 }},
            };
            return keys;
        }

        [[noreturn]] void geometry_error(const Error &e, const std::string &origin)
        {
            throw ConfigValueError(origin + ": " + e.what());
        }
    } // namespace

    const std::vector<std::pair<std::string, std::string>> &config_keys()
    {
        static const auto keys = [] {
            std::vector<std::pair<std::string, std::string>> out;
            for (const auto &k : schema())
                out.emplace_back(k.name, k.help);
            return out;
        }();
        return keys;
    }

    namespace
    {
        struct Entry
        {
            Context ctx;
            std::string value;
        };

        // Splits one `key = value` line; false for blank or comment-only lines.
        bool split_line(std::string line, Context &ctx, std::string &value)
        {
            if (const auto hash = line.find('#'); hash != std::string::npos)
                line.erase(hash);
            line = trim(line);
            if (line.empty())
                return false;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigSyntaxError(ctx.origin + ":" + std::to_string(ctx.line) + ": expected 'key = value', got '" +
                                        line + "'");
            ctx.key = trim(line.substr(0, eq));
            value = trim(line.substr(eq + 1));
            const auto &keys = schema();
            if (std::none_of(keys.begin(), keys.end(), [&](const KeySpec &k) { return k.name == ctx.key; }))
                throw ConfigUnknownKeyError(ctx.origin + ":" + std::to_string(ctx.line) + ": unknown key '" + ctx.key +
                                            "'");
            if (value.empty())
                ctx.syntax("missing value");
            return true;
        }
    } // namespace

    RunConfig parse_config_text(const std::string &text, const std::string &origin,
                                const std::vector<std::string> &overrides)
    {
        RunConfig cfg;
        Pending p;
        std::vector<Entry> entries;
        std::map<std::string, std::size_t> seen; // key -> index into entries
        {
            std::stringstream in(text);
            std::string line;
            Context ctx{origin, 0, ""};
            while (std::getline(in, line))
            {
                ++ctx.line;
                std::string value;
                if (!split_line(line, ctx, value))
                    continue;
                if (auto prev = seen.find(ctx.key); prev != seen.end())
                    ctx.syntax("duplicate key (first set on line " + std::to_string(entries[prev->second].ctx.line) + ")");
                seen[ctx.key] = entries.size();
                entries.push_back({ctx, value});
            }
        }
        // Overrides replace file values in place; repeating one is still an error.
        std::map<std::string, std::size_t> overridden;
        for (std::size_t i = 0; i < overrides.size(); ++i)
        {
            Context ctx{"--set", i + 1, ""};
            std::string value;
            if (!split_line(overrides[i], ctx, value))
                throw ConfigSyntaxError("--set: empty override");
            if (overridden.count(ctx.key))
                ctx.syntax("given more than once");
            overridden[ctx.key] = i;
            if (auto prev = seen.find(ctx.key); prev != seen.end())
                entries[prev->second] = {ctx, value};
            else
            {
                seen[ctx.key] = entries.size();
                entries.push_back({ctx, value});
            }
        }
        for (const auto &e : entries)
        {
            const auto &keys = schema();
            const auto it = std::find_if(keys.begin(), keys.end(), [&](const KeySpec &k) { return k.name == e.ctx.key; });
            it->apply(cfg, p, e.value, e.ctx);
            cfg.raw[e.ctx.key] = e.value;
        }

        // Geometry, converted to metres.
        const double lambda = p.wavelength_mm * 1e-3;
        SimGeometry &g = cfg.geometry;
        g.wavelength = lambda;
        g.input = {p.inputs_x, p.inputs_y, p.input_spacing * lambda, p.input_spacing * lambda};
        g.layer = {p.atoms_x, p.atoms_y, p.atom_spacing * lambda, p.atom_spacing * lambda};
        g.layers = p.layers;
        g.thickness = p.t_sim * lambda;
        const double rs = p.receiver_spacing.value_or(p.input_spacing) * lambda;
        g.receiver = {p.receiver_x.value_or(p.inputs_x), p.receiver_y.value_or(p.inputs_y), rs, rs};
        g.receiver_rotation = p.receiver_rotation_deg * pi / 180.0;
        try
        {
            g.validate();
        }
        catch (const Error &e)
        {
            geometry_error(e, origin);
        }

        if (p.azimuth_deg || p.elevation_deg)
        {
            if (p.psi_given)
                throw ConfigValueError(origin + ": give either psi_x/psi_y or azimuth_deg/elevation_deg, not both");
            const auto e = electrical_from_physical(p.azimuth_deg.value_or(0.0) * pi / 180.0,
                                                    p.elevation_deg.value_or(0.0) * pi / 180.0, g);
            cfg.psi_x = e.x;
            cfg.psi_y = e.y;
        }

        auto &mc = cfg.montecarlo;
        mc.protocol = cfg.protocol;
        mc.nx = p.inputs_x;
        mc.ny = p.inputs_y;
        mc.spacing_x_lambda = mc.spacing_y_lambda = p.input_spacing;
        for (const auto &[x, y] : p.fixed_psi)
        {
            SourceTruth s;
            s.psi_x = x;
            s.psi_y = y;
            mc.fixed_sources.push_back(s);
        }

        auto &sw = cfg.sweep;
        sw.inputs_per_side = p.inputs_x;
        sw.input_spacing_lambda = p.input_spacing;
        sw.train = cfg.train;
        if (!seen.count("sweep_t_sim_lambda"))
            sw.thickness_lambda = {p.t_sim};
        if (!seen.count("sweep_layers"))
            sw.layers = {p.layers};
        if (!seen.count("sweep_atoms_per_side"))
            sw.atoms_per_side = {p.atoms_x};
        if (!seen.count("sweep_spacing_lambda"))
            sw.spacing_lambda = {p.atom_spacing};

        auto &rx = cfg.receiver_study;
        rx.inputs_per_side = p.inputs_x;
        rx.thickness_lambda = p.t_sim;
        rx.atoms_per_side = p.atoms_x;
        rx.spacing_lambda = p.atom_spacing;
        rx.input_spacing_lambda = p.input_spacing;
        rx.train = cfg.train;
        if (!seen.count("rx_layers"))
            rx.layers = {p.layers};

        if ((seen.count("sweep_t_sim_lambda") || seen.count("sweep_layers") || seen.count("sweep_atoms_per_side") ||
             seen.count("sweep_spacing_lambda") || seen.count("rx_layers") || seen.count("rx_spacing_lambda") ||
             seen.count("rx_rotation_deg")) &&
            (p.inputs_x != p.inputs_y || p.atoms_x != p.atoms_y))
            throw ConfigValueError(origin + ": sweeps need square input and layer grids");
        return cfg;
    }

    RunConfig parse_config(const std::filesystem::path &path)
    {
        std::ifstream in(path);
        if (!in)
            throw IoError("cannot read config file '" + path.string() + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        auto cfg = parse_config_text(ss.str(), path.string());
        if (cfg.stack && cfg.stack->is_relative())
            cfg.stack = path.parent_path() / *cfg.stack;
        return cfg;
    }
} // namespace simdoa
