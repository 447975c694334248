// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The simdoa authors

#include "doctest.h"
#include "simdoa/analysis.hpp"

#include <random>

using namespace simdoa;

namespace
{
    // Composite Simpson integral of the standard normal density over [a, b].
    double normal_mass(double a, double b, int n = 20000)
    {
        const double h = (b - a) / n;
        auto pdf = [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * pi); };
        double s = pdf(a) + pdf(b);
        for (int i = 1; i < n; ++i)
            s += (i % 2 ? 4.0 : 2.0) * pdf(a + i * h);
        return s * h / 3.0;
    }

    // Empirical Pr{X_nt >= X_peak} for two independent noncentral chi-square(2).
    double simulated_prob(double d_nt, double d_peak, std::mt19937_64 &rng, int draws)
    {
        std::normal_distribution<double> z;
        const double m_nt = std::sqrt(d_nt), m_p = std::sqrt(d_peak);
        int hits = 0;
        for (int i = 0; i < draws; ++i)
        {
            const double a = z(rng) + m_nt, b = z(rng);
            const double c = z(rng) + m_p, d = z(rng);
            hits += (a * a + b * b >= c * c + d * d);
        }
        return static_cast<double>(hits) / draws;
    }

    BoundInputs ideal_inputs(double px, double py, double snr, const ProtocolConfig &p)
    {
        BoundInputs in;
        in.g = dft_matrix(2, 2).matrix;
        in.protocol = p;
        in.nx = in.ny = 2;
        in.psi_x = px;
        in.psi_y = py;
        in.snr = snr;
        return in;
    }
} // namespace

TEST_CASE("Gaussian tail")
{
    CHECK(q_function(0.0) == 0.5);
    CHECK(q_function(1.96) == doctest::Approx(0.0250).epsilon(1e-3));
    CHECK(q_function(1.96) == doctest::Approx(normal_mass(1.96, 12.0)).epsilon(1e-9));
    CHECK(q_function(-0.7) == doctest::Approx(1.0 - q_function(0.7)).epsilon(1e-14));
    CHECK(q_function(40.0) >= 0.0);
}

TEST_CASE("cumulants of the difference")
{
    // Hand-evaluated: delta_nt = 1, delta_peak = 3.
    const auto m = moments(1.0, 3.0);
    CHECK(m.mu1 == -2.0);
    CHECK(m.mu2 == 12.0);
    CHECK(m.mu3 == -6.0);
    CHECK(m.h() == doctest::Approx(1728.0 / 36.0));

    const auto sym = moments(2.5, 2.5);
    CHECK(sym.mu1 == 0.0);
    CHECK(sym.mu3 == 0.0);
    CHECK(detection_prob_bound(sym) == doctest::Approx(0.5));
    CHECK_THROWS_AS(moments(-1.0, 0.0), ArgumentError);
}

TEST_CASE("detection probability tracks simulation")
{
    std::mt19937_64 rng(12);
    const std::pair<double, double> cases[] = {{0.0, 4.0}, {2.0, 6.0}, {5.0, 2.0}, {0.0, 20.0}, {10.0, 14.0}, {1.0, 1.5}};
    for (auto [dn, dp] : cases)
    {
        const double approx = detection_prob_bound(moments(dn, dp));
        const double sim = simulated_prob(dn, dp, rng, 200000);
        INFO("delta_nt=" << dn << " delta_peak=" << dp << " approx=" << approx << " sim=" << sim);
        CHECK(std::abs(approx - sim) < 0.03);
    }
}

TEST_CASE("pure noise gives one half")
{
    std::mt19937_64 rng(40);
    CHECK(detection_prob_bound(moments(0.0, 0.0)) == 0.5);
    CHECK(simulated_prob(0.0, 0.0, rng, 1000000) == doctest::Approx(0.5).epsilon(0.005));
}

TEST_CASE("detection probability shape")
{
    double prev = 1.0;
    for (double dp = 0.0; dp <= 60.0; dp += 2.0)
    {
        const double p = detection_prob_bound(moments(0.0, dp));
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        CHECK(p <= prev + 1e-12);
        prev = p;
    }
    CHECK(detection_prob_bound(moments(0.0, 400.0)) < 1e-12);
    CHECK(detection_prob_bound(moments(400.0, 0.0)) > 1.0 - 1e-12);
}

TEST_CASE("noncentrality is twice the noiseless energy")
{
    std::mt19937_64 rng(3);
    BoundInputs in = ideal_inputs(0.31, -0.62, 5.0, {4, 2});
    for (auto &x : in.g.reshaped())
        x = cscg_sample(rng);
    in.symbol = {0.4, -1.1};
    const auto a = steering_vector_normalized(in.psi_x, in.psi_y, 2, 2).entries;
    const RMatrix e = noiseless_energy(in.g, a, in.symbol, in.snr, in.protocol, 2, 2);
    const RMatrix d = noncentrality_map(in);
    CHECK((d - 2.0 * e).cwiseAbs().maxCoeff() <= 1e-12 * d.maxCoeff());
    CHECK(noncentrality(in, 3, 5) == doctest::Approx(2.0 * e(2, 4)));
    CHECK(peak_index_noiseless(in) == peak_index(e));
    in.symbol *= 3.0;
    CHECK(peak_index_noiseless(in) == peak_index(e));
}

TEST_CASE("on-lattice source with the ideal response")
{
    const ProtocolConfig p{4, 4};
    auto in = ideal_inputs(0.5, -0.25, 2.0, p);
    const RMatrix d = noncentrality_map(in);
    // In the matching snapshot all energy lands in one bin: 2 rho N^2 |s|^2.
    // Each snapshot carries 2 rho N ||a||^2 in total (F^H F = N I).
    Eigen::Index n = 0, t = 0;
    CHECK(d.maxCoeff(&n, &t) == doctest::Approx(2.0 * 2.0 * 16.0));
    CHECK(d.col(t).sum() == doctest::Approx(d(n, t)));
    for (Eigen::Index k = 0; k < d.cols(); ++k)
        CHECK(d.col(k).sum() == doctest::Approx(2.0 * 2.0 * 16.0));

    double prev = 1e9;
    for (double db = -10.0; db <= 30.0; db += 5.0)
    {
        in.snr = db_to_linear(db);
        const auto b = mse_bound(in);
        CHECK(b.x <= prev + 1e-15);
        prev = b.x;
    }
    in.snr = 1e4;
    const auto b = mse_bound(in);
    CHECK(b.x < 1e-20);
    CHECK(b.y < 1e-20);
}

TEST_CASE("bound with zero SNR picks cell (1,1)")
{
    auto in = ideal_inputs(0.3, 0.3, 0.0, {2, 2});
    const auto b = mse_bound(in);
    CHECK(std::isfinite(b.x));
    CHECK(b.x > 0.0);
    CHECK_THROWS_AS((ideal_inputs(0.0, 0.0, -1.0, {2, 2}).validate()), ArgumentError);
}

TEST_CASE("quantization floor")
{
    const ProtocolConfig p{4, 4};
    const double step = 2.0 / 8.0;
    SUBCASE("uniform electrical angles give step^2 / 12")
    {
        const auto f = quantization_floor(2, 2, p, SourceDistribution::uniform_electrical);
        CHECK(f.x == doctest::Approx(step * step / 12.0).epsilon(1e-5));
        CHECK(f.y == doctest::Approx(f.x));
    }
    SUBCASE("a single-point lattice returns the second moment of psi")
    {
        // E[sin^2(theta) cos^2(phi)] = 1/4 for theta ~ U[0, pi/2].
        const auto f = quantization_floor(1, 1, {1, 1}, SourceDistribution::uniform_angles);
        CHECK(f.x == doctest::Approx(0.25).epsilon(1e-5));
        CHECK(f.y == doctest::Approx(0.25).epsilon(1e-5));
        // Over the hemisphere E[sin^2 theta] = 2/3, so 1/3 per axis.
        const auto s = quantization_floor(1, 1, {1, 1}, SourceDistribution::uniform_solid_angle);
        CHECK(s.x == doctest::Approx(1.0 / 3.0).epsilon(1e-4));
    }
    SUBCASE("fine lattices approach step^2 / 12 for every mode")
    {
        const ProtocolConfig fine{16, 16};
        const double d = 2.0 / 64.0;
        for (auto mode : {SourceDistribution::uniform_angles, SourceDistribution::uniform_solid_angle})
        {
            const auto f = quantization_floor(4, 4, fine, mode);
            CHECK(f.x == doctest::Approx(d * d / 12.0).epsilon(0.03));
        }
    }
    const auto fine = quantization_floor(2, 2, {64, 64}, SourceDistribution::uniform_electrical);
    CHECK(fine.x == doctest::Approx(2.03e-5).epsilon(0.01));
    CHECK(lattice_residual(0.26, 0.25) == doctest::Approx(0.01));
    CHECK(lattice_residual(-0.9, 0.25) == doctest::Approx(0.1));
    CHECK(source_distribution_from_string("uniform_solid_angle") == SourceDistribution::uniform_solid_angle);
    CHECK_THROWS_AS(source_distribution_from_string("gauss"), ArgumentError);
}
