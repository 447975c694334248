// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The simdoa authors

#include "doctest.h"
#include "simdoa/geometry.hpp"

#include <random>

using namespace simdoa;

namespace
{
    // Plain complex exponential form of the diffraction coefficient.
    cplx rs_oracle(double d, double area, double gap, double lambda)
    {
        const double k = 2.0 * std::acos(-1.0) / lambda;
        return area * gap / (2.0 * std::acos(-1.0) * d * d * d) * (1.0 - cplx(0.0, 1.0) * k * d) *
               std::exp(cplx(0.0, k * d));
    }

    SimGeometry table1()
    {
        return SimGeometry::square(2, 11, 7, 9.0, 0.5);
    }
} // namespace

TEST_CASE("linear index maps row-major, 1-based")
{
    CHECK(linear_to_grid(1, 3, 2) == GridIndex{1, 1});
    CHECK(linear_to_grid(3, 3, 2) == GridIndex{3, 1});
    CHECK(linear_to_grid(4, 3, 2) == GridIndex{1, 2});
    CHECK(linear_to_grid(6, 3, 2) == GridIndex{3, 2});
    CHECK_THROWS_AS(linear_to_grid(0, 3, 2), ArgumentError);
    CHECK_THROWS_AS(linear_to_grid(7, 3, 2), ArgumentError);
    CHECK_THROWS_AS(grid_to_linear({4, 1}, 3, 2), ArgumentError);

    for (std::size_t w = 1; w <= 5; ++w)
        for (std::size_t h = 1; h <= 4; ++h)
            for (std::size_t i = 1; i <= w * h; ++i)
                CHECK(grid_to_linear(linear_to_grid(i, w, h), w, h) == i);
}

TEST_CASE("distances")
{
    const auto g = table1();
    const double gap = 9.0 * g.wavelength / 7.0;
    CHECK(g.layer_gap() == doctest::Approx(gap).epsilon(1e-15));
    CHECK(intra_sim_distance(5, 5, g) == doctest::Approx(gap));

    // Atom 1 -> atom 13 is one step in x and one in y.
    const double s = 0.5 * g.wavelength;
    CHECK(intra_sim_distance(1, 13, g) == doctest::Approx(std::sqrt(2 * s * s + gap * gap)).epsilon(1e-14));
    CHECK(intra_sim_distance(1, 13, g) == intra_sim_distance(13, 1, g));

    // Centered grids: the middle atom of the 11x11 layer sits at the center of
    // the 2x2 input, half a spacing away from every input along x and y.
    const double d = 0.5 * g.wavelength;
    const double expect = std::sqrt(2 * (d / 2) * (d / 2) + gap * gap);
    for (std::size_t n = 1; n <= 4; ++n)
        CHECK(input_to_first_distance(61, n, g) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("diffraction coefficient")
{
    const auto g = table1();
    for (double d : {g.layer_gap(), 1.7 * g.layer_gap(), 3.1e-2})
    {
        const auto w = rs_coefficient(d, 2.5e-6, g);
        const auto o = rs_oracle(d, 2.5e-6, g.layer_gap(), g.wavelength);
        CHECK(std::abs(w - o) <= 1e-13 * std::abs(o));
    }
    CHECK_THROWS_AS(rs_coefficient(0.0, 1.0, g), ArgumentError);
    CHECK_THROWS_AS(rs_coefficient(1.0, 0.0, g), ArgumentError);
}

TEST_CASE("propagation matrices")
{
    const auto g = table1();
    const auto p = build_propagation_matrices(g);
    CHECK(p.w_input.rows() == 121);
    CHECK(p.w_input.cols() == 4);
    CHECK(p.w_inner.rows() == 121);
    CHECK(p.w_receiver.rows() == 4);

    SUBCASE("isomorphic receiver gives the transpose exactly")
    {
        CHECK(p.w_receiver == p.w_input.transpose());
    }
    SUBCASE("explicit receiver distances agree with the input distances bit for bit at zero rotation")
    {
        for (std::size_t m = 1; m <= 121; ++m)
            for (std::size_t r = 1; r <= 4; ++r)
                CHECK(last_to_receiver_distance(m, r, g) == input_to_first_distance(m, r, g));
    }
    SUBCASE("inner hop is symmetric")
    {
        CHECK((p.w_inner - p.w_inner.transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("entries match the oracle")
    {
        const double area = g.input.dx * g.input.dy;
        for (std::size_t m : {1u, 17u, 61u, 121u})
            for (std::size_t n = 1; n <= 4; ++n)
            {
                const auto o = rs_oracle(input_to_first_distance(m, n, g), area, g.layer_gap(), g.wavelength);
                CHECK(std::abs(p.w_input(m - 1, n - 1) - o) <= 1e-13 * std::abs(o));
            }
    }
    SUBCASE("a quarter-turn receiver permutes the receive rows")
    {
        auto r = g;
        r.receiver_rotation = std::acos(-1.0) / 2.0;
        const auto pr = build_propagation_matrices(r);
        // (x, y) -> (-y, x) about the center maps 1->2, 2->4, 4->3, 3->1.
        const int to[4] = {2, 4, 1, 3};
        for (int i = 0; i < 4; ++i)
        {
            const double diff = (pr.w_receiver.row(i) - p.w_receiver.row(to[i] - 1)).cwiseAbs().maxCoeff();
            CHECK(diff <= 1e-12 * p.w_receiver.cwiseAbs().maxCoeff());
        }
    }
    SUBCASE("single layer has no inner hop")
    {
        auto one = g;
        one.layers = 1;
        const auto p1 = build_propagation_matrices(one);
        CHECK(p1.w_inner.size() == 0);
        CHECK(&p1.hop(1) == &p1.w_receiver);
    }
}

TEST_CASE("geometry validation names the field")
{
    auto g = table1();
    g.input.dx = -1.0;
    try
    {
        g.validate();
        FAIL("expected an exception");
    }
    catch (const ArgumentError &e)
    {
        CHECK(std::string(e.what()).find("input.dx") != std::string::npos);
    }
    g = table1();
    g.layers = 0;
    CHECK_THROWS_AS(g.validate(), ArgumentError);
    g = table1();
    g.thickness = 0.0;
    CHECK_THROWS_AS(build_propagation_matrices(g), ArgumentError);
}

TEST_CASE("geometry hash")
{
    const auto a = table1();
    auto b = a;
    CHECK(a.hash() == b.hash());
    CHECK(a.hash().size() == 16);
    b.thickness *= 1.0000001;
    CHECK(a.hash() != b.hash());
}

TEST_CASE("steering vector")
{
    const double px = 0.37, py = -1.21;
    const auto sv = steering_vector(px, py, 3, 2);
    REQUIRE(sv.entries.size() == 6);
    // a_y kron a_x: element (iy, ix) at iy * nx + ix.
    for (int iy = 0; iy < 2; ++iy)
        for (int ix = 0; ix < 3; ++ix)
        {
            const cplx o = std::exp(cplx(0.0, py * iy)) * std::exp(cplx(0.0, px * ix));
            CHECK(std::abs(sv.entries(iy * 3 + ix) - o) < 1e-15);
        }
    CHECK(sv.entries.norm() == doctest::Approx(std::sqrt(6.0)));
    const auto n = steering_vector_normalized(0.5, 0.25, 2, 2);
    CHECK(std::abs(n.entries(1) - cplx(0.0, 1.0)) < 1e-15);
}

TEST_CASE("2-D DFT matrix")
{
    SUBCASE("2x2 is the Hadamard-like sign matrix")
    {
        const auto f = dft_matrix(2, 2).matrix;
        const double sign[4][4] = {{1, 1, 1, 1}, {1, -1, 1, -1}, {1, 1, -1, -1}, {1, -1, -1, 1}};
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                CHECK(std::abs(f(i, j) - sign[i][j]) < 1e-15);
    }
    SUBCASE("4x4 structure")
    {
        const auto f = dft_matrix(4, 4).matrix;
        CHECK((f - f.transpose()).cwiseAbs().maxCoeff() == 0.0);
        CHECK((f.cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-15);
        const CMatrix gram = f.adjoint() * f;
        CHECK((gram - 16.0 * CMatrix::Identity(16, 16)).cwiseAbs().maxCoeff() < 1e-12);
        // Direct exponential oracle.
        for (int a = 0; a < 16; ++a)
            for (int b = 0; b < 16; ++b)
            {
                const double ph = -2.0 * std::acos(-1.0) * ((a % 4) * (b % 4) / 4.0 + (a / 4) * (b / 4) / 4.0);
                CHECK(std::abs(f(a, b) - std::exp(cplx(0.0, ph))) < 1e-13);
            }
    }
    SUBCASE("on-lattice steering vector is a single bin of magnitude N")
    {
        const auto f = dft_matrix(4, 2).matrix;
        const auto a = steering_vector_normalized(2.0 * 3 / 4, 2.0 * 1 / 2, 4, 2).entries;
        const CVector y = f * a;
        Eigen::Index at = 0;
        y.cwiseAbs().maxCoeff(&at);
        CHECK(at == 1 * 4 + 3);
        CHECK(std::abs(y(at)) == doctest::Approx(8.0));
        CHECK(y.cwiseAbs().sum() - std::abs(y(at)) < 1e-12);
    }
}

TEST_CASE("feasibility")
{
    CHECK(check_feasibility(table1()).feasible);
    const auto bad = SimGeometry::square(2, 1, 3, 9.0, 0.5);
    const auto r = check_feasibility(bad);
    CHECK_FALSE(r.feasible);
    CHECK(r.atoms == 1);
    CHECK(r.inputs == 4);
    CHECK_FALSE(r.message.empty());
}

TEST_CASE("worked index and distance examples")
{
    CHECK(linear_to_grid(5, 4, 2) == GridIndex{1, 2});
    CHECK(linear_to_grid(7, 3, 3) == GridIndex{1, 3});

    const double lambda = 5e-3, s = lambda / 2;
    auto g = SimGeometry::square(2, 3, 2, 2.0, 0.5);
    const double gap = g.layer_gap();
    CHECK(intra_sim_distance(1, 9, g) == doctest::Approx(std::sqrt(8 * s * s + gap * gap)).epsilon(1e-14));
    // Atom 1 sits at (-s, -s), input 1 at (-s/2, -s/2) about the common center.
    CHECK(input_to_first_distance(1, 1, g) ==
          doctest::Approx(std::sqrt(2 * (s / 2) * (s / 2) + gap * gap)).epsilon(1e-14));

    auto one = SimGeometry::square(1, 1, 1, 1.0, 0.5);
    CHECK(input_to_first_distance(1, 1, one) == doctest::Approx(one.layer_gap()));
    auto centered = SimGeometry::square(1, 3, 1, 1.0, 0.5);
    CHECK(input_to_first_distance(5, 1, centered) == doctest::Approx(centered.layer_gap()));
}

TEST_CASE("coefficient at d = gap = lambda")
{
    const double lambda = 5e-3;
    auto g = SimGeometry::square(1, 1, 1, 1.0, 0.5);
    REQUIRE(g.layer_gap() == doctest::Approx(lambda));
    // A s / (2 pi d^3) (1 - j 2 pi) e^{j 2 pi} with A = (lambda/2)^2, s = d = lambda.
    const double amp = (lambda * lambda / 4) * lambda / (2 * pi * lambda * lambda * lambda);
    const cplx expect = amp * cplx(1.0, -2 * pi) * std::exp(cplx(0.0, 2 * pi));
    const cplx got = rs_coefficient(lambda, lambda * lambda / 4, g);
    CHECK(std::abs(got - expect) < 1e-12 * std::abs(expect));
    CHECK(std::abs(got) == doctest::Approx(std::sqrt(1 + 4 * pi * pi) / (8 * pi)));
}

TEST_CASE("small stack matrices match per-entry oracle")
{
    const auto g = SimGeometry::square(2, 3, 2, 2.0, 0.5);
    const auto p = build_propagation_matrices(g);
    const double a_in = g.input.dx * g.input.dy, a_in_layer = g.layer.dx * g.layer.dy;
    for (std::size_t m = 1; m <= 9; ++m)
    {
        for (std::size_t n = 1; n <= 4; ++n)
        {
            const auto o = rs_oracle(input_to_first_distance(m, n, g), a_in, g.layer_gap(), g.wavelength);
            CHECK(std::abs(p.w_input(m - 1, n - 1) - o) <= 1e-13 * std::abs(o));
        }
        for (std::size_t k = 1; k <= 9; ++k)
        {
            const auto o = rs_oracle(intra_sim_distance(m, k, g), a_in_layer, g.layer_gap(), g.wavelength);
            CHECK(std::abs(p.w_inner(m - 1, k - 1) - o) <= 1e-13 * std::abs(o));
        }
    }
}

TEST_CASE("steering vector for the wide-angle example is a Kronecker product")
{
    const auto a = steering_vector_normalized(0.48, 0.23, 2, 2).entries;
    const cplx ax[2] = {1.0, std::exp(cplx(0.0, 0.48 * pi))};
    const cplx ay[2] = {1.0, std::exp(cplx(0.0, 0.23 * pi))};
    for (int iy = 0; iy < 2; ++iy)
        for (int ix = 0; ix < 2; ++ix)
            CHECK(std::abs(a(2 * iy + ix) - ay[iy] * ax[ix]) < 1e-15);
    CHECK(a(0) == cplx(1.0, 0.0));
}
