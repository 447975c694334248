// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The simdoa authors

#include "doctest.h"
#include "simdoa/trainer.hpp"

using namespace simdoa;

TEST_CASE("analytic gradient matches finite differences")
{
    for (std::size_t layers : {1u, 2u, 3u})
    {
        const auto g = SimGeometry::square(2, 3, layers, 3.0, 0.6);
        const auto p = build_propagation_matrices(g);
        auto rng = derive_stream(9, layers);
        const auto s = PhaseStack::random(layers, 9, rng);
        const CMatrix f = dft_matrix(2, 2).matrix;
        const cplx beta = optimal_scale(forward_response(p, s), f) * std::polar(0.8, 0.3);
        const auto r = compare_gradients(gradient(p, s, f, beta), finite_diff_gradient(p, s, f, beta, 1e-5));
        CHECK(r.max_rel_error < 1e-6);
        CHECK(r.cosine > 1.0 - 1e-10);
    }
}

TEST_CASE("scalar stack gradient matches calculus")
{
    // N = M = L = 1: loss = |c e^{j xi} - f|^2 with c = beta w_L w_0, so
    // d loss / d xi = 2 Im(conj(f) c e^{j xi}).
    const auto g = SimGeometry::square(1, 1, 1, 1.3, 0.5);
    const auto p = build_propagation_matrices(g);
    const CMatrix f = CMatrix::Constant(1, 1, cplx(0.4, -0.9));
    const cplx beta(2.0e3, 1.5e3);
    for (double xi : {0.0, 0.7, 2.9, 5.1})
    {
        const PhaseStack s({RVector::Constant(1, xi)});
        const cplx c = beta * p.w_receiver(0, 0) * p.w_input(0, 0);
        const double expect = 2.0 * (std::conj(f(0, 0)) * c * std::polar(1.0, xi)).imag();
        CHECK(gradient(p, s, f, beta)[0](0) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("gradient vanishes in the phase-insensitive direction")
{
    // A common phase shift on the last layer only rotates G, which the
    // optimal beta absorbs, so the gradient sums to zero there at beta*.
    const auto g = SimGeometry::square(2, 3, 2, 3.0, 0.5);
    const auto p = build_propagation_matrices(g);
    auto rng = derive_stream(4);
    const auto s = PhaseStack::random(2, 9, rng);
    const CMatrix f = dft_matrix(2, 2).matrix;
    const cplx beta = optimal_scale(forward_response(p, s), f);
    const auto grad = gradient(p, s, f, beta);
    CHECK(std::abs(grad[1].sum()) < 1e-9 * grad[1].cwiseAbs().maxCoeff());
    CHECK(std::abs(grad[0].sum()) < 1e-9 * grad[0].cwiseAbs().maxCoeff());
}

TEST_CASE("descent step scaling")
{
    const RVector grad = (RVector(3) << 0.5, -2.0, 1.0).finished();
    const RVector plain = descent_step(grad, 0.1, GradientScaling::none);
    CHECK(plain(1) == doctest::Approx(0.2));
    const RVector norm = descent_step(grad, 0.1, GradientScaling::layer_max);
    CHECK(norm.cwiseAbs().maxCoeff() == doctest::Approx(0.1 * pi));
    CHECK(norm(0) / norm(2) == doctest::Approx(0.5));
    CHECK(norm(1) > 0.0);
    CHECK(descent_step(RVector::Zero(3), 0.1, GradientScaling::layer_max).isZero());
}

TEST_CASE("config validation and names")
{
    TrainConfig c;
    CHECK(c.eta0 == 0.2);
    CHECK(c.zeta == 0.8);
    CHECK(c.max_iters == 200);
    c.zeta = 1.5;
    CHECK_THROWS_AS(c.validate(), ArgumentError);
    c = {};
    c.eta0 = 0.0;
    CHECK_THROWS_AS(c.validate(), ArgumentError);
    CHECK(gradient_scaling_from_string("none") == GradientScaling::none);
    CHECK(to_string(GradientScaling::layer_max) == "layer_max");
    CHECK_THROWS_AS(gradient_scaling_from_string("adam"), ArgumentError);
}

TEST_CASE("training is deterministic and keeps the best iterate")
{
    const auto g = SimGeometry::square(2, 5, 2, 4.0, 0.5);
    const auto p = build_propagation_matrices(g);
    const CMatrix f = dft_matrix(2, 2).matrix;
    TrainConfig c;
    c.max_iters = 40;
    c.seed = 17;
    const auto a = train(p, f, c);
    const auto b = train(p, f, c);
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i)
        CHECK(a.history[i].loss == b.history[i].loss);
    CHECK(a.stack == b.stack);

    for (const auto &h : a.history)
        CHECK(a.best_loss() <= h.loss);
    // The returned stack reproduces the recorded best loss.
    const auto again = fitting_loss(forward_response(p, a.stack), f, a.beta);
    CHECK(again.loss == doctest::Approx(a.best_loss()).epsilon(1e-9));
    CHECK(a.best_loss() < a.history.front().loss);
}

TEST_CASE("restarts return the best run")
{
    const auto g = SimGeometry::square(2, 4, 2, 4.0, 0.5);
    const auto p = build_propagation_matrices(g);
    const CMatrix f = dft_matrix(2, 2).matrix;
    TrainConfig c;
    c.max_iters = 15;
    c.restarts = 3;
    const auto best = train(p, f, c);
    double lowest = 1e300;
    for (std::size_t r = 0; r < 3; ++r)
    {
        auto rng = derive_stream(c.seed, r);
        lowest = std::min(lowest, descend(p, f, c, PhaseStack::random(2, 16, rng)).best_loss());
    }
    CHECK(best.best_loss() == lowest);
}

TEST_CASE("relative tolerance stops early")
{
    const auto g = SimGeometry::square(2, 4, 2, 4.0, 0.5);
    const auto p = build_propagation_matrices(g);
    const CMatrix f = dft_matrix(2, 2).matrix;
    TrainConfig c;
    c.max_iters = 500;
    c.rel_tolerance = 1e-3;
    c.zeta = 0.5;
    const auto r = train(p, f, c);
    CHECK(r.stop_reason == StopReason::converged);
    CHECK(r.iterations < 500);
}

TEST_CASE("the default 2x2 stack fits the DFT")
{
    const auto g = SimGeometry::square(2, 11, 7, 9.0, 0.5);
    const auto p = build_propagation_matrices(g);
    const CMatrix f = dft_matrix(2, 2).matrix;
    TrainConfig c;
    double best = 0.0;
    for (std::uint64_t seed = 1; seed <= 3; ++seed)
    {
        c.seed = seed;
        best = std::min(best, train(p, f, c).best_db());
    }
    CHECK(best <= -170.0);
}

TEST_CASE("a thin sparse stack cannot fit")
{
    // (3 lambda, 9 layers, 9 atoms, 2 lambda / 9)
    const auto g = SimGeometry::square(2, 3, 9, 3.0, 2.0 / 9.0);
    const auto p = build_propagation_matrices(g);
    const CMatrix f = dft_matrix(2, 2).matrix;
    TrainConfig c;
    double mean = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed)
    {
        c.seed = seed;
        mean += train(p, f, c).best_db() / 5.0;
    }
    CHECK(mean >= -10.0);
}

TEST_CASE("shape mismatches are structural errors")
{
    const auto g = SimGeometry::square(2, 3, 2, 3.0, 0.5);
    const auto p = build_propagation_matrices(g);
    CHECK_THROWS_AS(gradient(p, PhaseStack(2, 9), CMatrix::Identity(3, 3), 1.0), StructuralError);
    CHECK_THROWS_AS(gradient(p, PhaseStack(1, 9), CMatrix::Identity(4, 4), 1.0), StructuralError);
}

TEST_CASE("stream derivation")
{
    auto a = derive_stream(1, 0, 0);
    auto b = derive_stream(1, 0, 0);
    auto c = derive_stream(1, 0, 1);
    auto d = derive_stream(1, 1, 0);
    const auto va = a();
    CHECK(va == b());
    CHECK(va != c());
    CHECK(va != d());
}
