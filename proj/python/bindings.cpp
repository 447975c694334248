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

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "simdoa/analysis.hpp"
#include "simdoa/config.hpp"
#include "simdoa/estimator.hpp"
#include "simdoa/experiments.hpp"
#include "simdoa/geometry.hpp"
#include "simdoa/io.hpp"
#include "simdoa/trainer.hpp"
#include "simdoa/wave_model.hpp"

namespace py = pybind11;
using namespace simdoa;

namespace
{
    PhaseStack to_stack(const std::vector<RVector> &phases)
    {
        return PhaseStack(phases);
    }

    std::vector<RVector> from_stack(const PhaseStack &s)
    {
        std::vector<RVector> out;
        for (std::size_t l = 1; l <= s.layers(); ++l)
            out.push_back(s.phases(l));
        return out;
    }

    py::dict point_dict(const McPoint &p)
    {
        py::dict d;
        d["snr_db"] = p.snr_db;
        d["snr"] = p.snr;
        d["trials"] = p.trials;
        d["mse_x"] = p.mse_x;
        d["mse_y"] = p.mse_y;
        d["se_x"] = p.se_x;
        d["se_y"] = p.se_y;
        d["bound_x"] = p.bound_x;
        d["bound_y"] = p.bound_y;
        d["bound_se_x"] = p.bound_se_x;
        d["bound_se_y"] = p.bound_se_y;
        d["low_trials"] = p.low_trials;
        return d;
    }
} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "simdoa core: SIM modelling, training, DOA estimation and the MSE bound";

    auto base = py::register_exception<Error>(m, "SimdoaError", PyExc_RuntimeError);
    py::register_exception<ArgumentError>(m, "ArgumentError", base.ptr());
    py::register_exception<StructuralError>(m, "StructuralError", base.ptr());
    py::register_exception<DegenerateInputError>(m, "DegenerateInputError", base.ptr());
    py::register_exception<UnrealizableAngleError>(m, "UnrealizableAngleError", base.ptr());
    py::register_exception<IoError>(m, "IoError", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

    py::class_<PlanarGrid>(m, "PlanarGrid")
        .def(py::init<>())
        .def(py::init([](std::size_t nx, std::size_t ny, double dx, double dy) { return PlanarGrid{nx, ny, dx, dy}; }),
             py::arg("nx"), py::arg("ny"), py::arg("dx"), py::arg("dy"))
        .def_readwrite("nx", &PlanarGrid::nx)
        .def_readwrite("ny", &PlanarGrid::ny)
        .def_readwrite("dx", &PlanarGrid::dx)
        .def_readwrite("dy", &PlanarGrid::dy)
        .def_property_readonly("count", &PlanarGrid::count)
        .def("__repr__", [](const PlanarGrid &g) {
            return "PlanarGrid(" + std::to_string(g.nx) + "x" + std::to_string(g.ny) + ")";
        });

    py::class_<SimGeometry>(m, "SimGeometry")
        .def(py::init<>())
        .def_static("square", &SimGeometry::square, py::arg("inputs_per_side"), py::arg("atoms_per_side"),
                    py::arg("layers"), py::arg("thickness_lambda"), py::arg("spacing_lambda"),
                    py::arg("input_spacing_lambda") = 0.5, py::arg("wavelength") = 5e-3)
        .def_readwrite("wavelength", &SimGeometry::wavelength)
        .def_readwrite("input", &SimGeometry::input)
        .def_readwrite("layer", &SimGeometry::layer)
        .def_readwrite("layers", &SimGeometry::layers)
        .def_readwrite("thickness", &SimGeometry::thickness)
        .def_readwrite("receiver", &SimGeometry::receiver)
        .def_readwrite("receiver_rotation", &SimGeometry::receiver_rotation)
        .def_property_readonly("layer_gap", &SimGeometry::layer_gap)
        .def("validate", &SimGeometry::validate)
        .def("hash", &SimGeometry::hash)
        .def("receiver_isomorphic", &SimGeometry::receiver_isomorphic);

    py::class_<PropagationSet>(m, "PropagationSet")
        .def_readonly("w_input", &PropagationSet::w_input)
        .def_readonly("w_inner", &PropagationSet::w_inner)
        .def_readonly("w_receiver", &PropagationSet::w_receiver)
        .def_readonly("layers", &PropagationSet::layers);

    m.def("build_propagation_matrices", &build_propagation_matrices, py::arg("geometry"));
    m.def("dft_matrix", [](std::size_t nx, std::size_t ny) { return dft_matrix(nx, ny).matrix; }, py::arg("nx"),
          py::arg("ny"));
    m.def("steering_vector",
          [](double px, double py_, std::size_t nx, std::size_t ny) {
              return steering_vector_normalized(px, py_, nx, ny).entries;
          },
          py::arg("psi_x"), py::arg("psi_y"), py::arg("nx"), py::arg("ny"),
          "Steering vector for normalized electrical angles (units of pi).");

    m.def("forward_response",
          [](const SimGeometry &g, const std::vector<RVector> &phases) {
              return forward_response(build_propagation_matrices(g), to_stack(phases));
          },
          py::arg("geometry"), py::arg("phases"));
    m.def("optimal_scale", &optimal_scale, py::arg("g"), py::arg("f"));
    m.def("normalized_loss_db",
          [](const CMatrix &g, const CMatrix &f) { return fitting_loss(g, f, optimal_scale(g, f)).normalized_db; },
          py::arg("g"), py::arg("f"));
    m.def("gradient",
          [](const SimGeometry &geom, const std::vector<RVector> &phases, const CMatrix &f, cplx beta) {
              return gradient(build_propagation_matrices(geom), to_stack(phases), f, beta);
          },
          py::arg("geometry"), py::arg("phases"), py::arg("f"), py::arg("beta"));

    m.def(
        "train",
        [](const SimGeometry &g, double eta0, double zeta, std::size_t iterations, std::uint64_t seed,
           std::size_t restarts, const std::string &scaling) {
            TrainConfig c;
            c.eta0 = eta0;
            c.zeta = zeta;
            c.max_iters = iterations;
            c.seed = seed;
            c.restarts = restarts;
            c.scaling = gradient_scaling_from_string(scaling);
            const auto props = build_propagation_matrices(g);
            TrainReport r;
            {
                py::gil_scoped_release release;
                r = train(props, dft_matrix(g.input.nx, g.input.ny).matrix, c);
            }
            std::vector<double> db;
            for (const auto &h : r.history)
                db.push_back(h.normalized_db);
            py::dict d;
            d["phases"] = from_stack(r.stack);
            d["beta"] = r.beta;
            d["history_db"] = db;
            d["best_db"] = r.best_db();
            d["best_iteration"] = r.best_iteration;
            d["stop_reason"] = to_string(r.stop_reason);
            return d;
        },
        py::arg("geometry"), py::arg("eta0") = 0.2, py::arg("zeta") = 0.8, py::arg("iterations") = 200,
        py::arg("seed") = 1, py::arg("restarts") = 1, py::arg("scaling") = "layer_max");

    m.def(
        "energy_map",
        [](const CMatrix &g, double psi_x, double psi_y, std::size_t nx, std::size_t ny, std::size_t tx,
           std::size_t ty, double snr, cplx symbol, std::optional<std::uint64_t> noise_seed) {
            const ProtocolConfig p{tx, ty};
            const auto a = steering_vector_normalized(psi_x, psi_y, nx, ny).entries;
            if (!noise_seed)
                return noiseless_energy(g, a, symbol, snr, p, nx, ny);
            auto rng = derive_stream(*noise_seed);
            const cplx s[1] = {symbol};
            return collect_snapshots(g, a, s, snr, p, nx, ny, rng).values;
        },
        py::arg("g"), py::arg("psi_x"), py::arg("psi_y"), py::arg("nx"), py::arg("ny"), py::arg("tx"), py::arg("ty"),
        py::arg("snr") = 1.0, py::arg("symbol") = cplx{1.0, 0.0}, py::arg("noise_seed") = py::none(),
        "Energy |r_{n,t}|^2 (receivers x snapshots); noiseless unless noise_seed is given.");

    m.def(
        "estimate_doa",
        [](const RMatrix &energy, std::size_t tx, std::size_t ty, const SimGeometry &geom) {
            const auto e = estimate_doa(EnergyMap{energy}, ProtocolConfig{tx, ty}, geom);
            py::dict d;
            d["peak"] = py::make_tuple(e.peak.n, e.peak.t);
            d["psi_x"] = e.electrical.x;
            d["psi_y"] = e.electrical.y;
            d["azimuth"] = e.physical.azimuth;
            d["elevation"] = e.physical.elevation;
            d["realizable"] = e.physical.realizable;
            return d;
        },
        py::arg("energy"), py::arg("tx"), py::arg("ty"), py::arg("geometry"));

    m.def(
        "angular_spectrum",
        [](const RMatrix &energy, std::size_t tx, std::size_t ty, std::size_t nx, std::size_t ny) {
            const auto s = angular_spectrum(EnergyMap{energy}, ProtocolConfig{tx, ty}, nx, ny);
            return py::make_tuple(s.psi_x, s.psi_y, s.power);
        },
        py::arg("energy"), py::arg("tx"), py::arg("ty"), py::arg("nx"), py::arg("ny"),
        "Returns (psi_x, psi_y, power) with power[iy, ix].");

    m.def("physical_angles",
          [](double psi_x, double psi_y, const SimGeometry &g, bool clamp) {
              const auto p = physical_angles({psi_x, psi_y}, g, clamp);
              return py::make_tuple(p.azimuth, p.elevation, p.realizable);
          },
          py::arg("psi_x"), py::arg("psi_y"), py::arg("geometry"), py::arg("clamp") = false);

    m.def("q_function", &q_function, py::arg("x"));
    m.def("detection_prob_bound",
          [](double delta_nt, double delta_peak) { return detection_prob_bound(moments(delta_nt, delta_peak)); },
          py::arg("delta_nt"), py::arg("delta_peak"));
    m.def(
        "mse_bound",
        [](const CMatrix &g, std::size_t nx, std::size_t ny, std::size_t tx, std::size_t ty, double psi_x,
           double psi_y, double snr, cplx symbol) {
            BoundInputs in;
            in.g = g;
            in.protocol = {tx, ty};
            in.nx = nx;
            in.ny = ny;
            in.psi_x = psi_x;
            in.psi_y = psi_y;
            in.snr = snr;
            in.symbol = symbol;
            const auto b = mse_bound(in);
            return py::make_tuple(b.x, b.y);
        },
        py::arg("g"), py::arg("nx"), py::arg("ny"), py::arg("tx"), py::arg("ty"), py::arg("psi_x"), py::arg("psi_y"),
        py::arg("snr"), py::arg("symbol") = cplx{1.0, 0.0});
    m.def(
        "quantization_floor",
        [](std::size_t nx, std::size_t ny, std::size_t tx, std::size_t ty, const std::string &dist) {
            const auto f = quantization_floor(nx, ny, {tx, ty}, source_distribution_from_string(dist));
            return py::make_tuple(f.x, f.y);
        },
        py::arg("nx"), py::arg("ny"), py::arg("tx"), py::arg("ty"), py::arg("sources") = "uniform_angles");

    m.def(
        "monte_carlo",
        [](const CMatrix &g, cplx beta, std::size_t nx, std::size_t ny, std::size_t tx, std::size_t ty,
           std::vector<double> snr_db, std::size_t trials, std::uint64_t seed, const std::string &sources,
           const std::string &path, bool with_bound, std::size_t jobs) {
            McConfig c;
            c.nx = nx;
            c.ny = ny;
            c.protocol = {tx, ty};
            c.snr_db = std::move(snr_db);
            c.trials = trials;
            c.seed = seed;
            c.sources = source_distribution_from_string(sources);
            c.path = estimator_path_from_string(path);
            c.with_bound = with_bound;
            c.jobs = jobs;
            std::vector<McPoint> pts;
            {
                py::gil_scoped_release release;
                pts = run_monte_carlo(c, SimResponse{g, beta});
            }
            py::list out;
            for (const auto &p : pts)
                out.append(point_dict(p));
            return out;
        },
        py::arg("g"), py::arg("beta"), py::arg("nx"), py::arg("ny"), py::arg("tx"), py::arg("ty"),
        py::arg("snr_db") = std::vector<double>{0.0, 10.0, 20.0, 30.0}, py::arg("trials") = 1000,
        py::arg("seed") = 1, py::arg("sources") = "uniform_angles", py::arg("path") = "sim",
        py::arg("with_bound") = true, py::arg("jobs") = 0);

    m.def(
        "gradcheck",
        [](std::size_t instances, std::uint64_t seed) {
            double worst = 0.0;
            for (const auto &r : gradcheck_suite(instances, seed))
                worst = std::max(worst, r.result.max_rel_error);
            return worst;
        },
        py::arg("instances") = 20, py::arg("seed") = 1, "Largest relative gradient error over random instances.");

    m.def("write_stack", [](const std::filesystem::path &p, const std::vector<RVector> &phases) {
        write_stack(p, to_stack(phases));
    });
    m.def("read_stack", [](const std::filesystem::path &p) { return from_stack(read_stack(p)); });
}
