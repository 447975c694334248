// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The simdoa authors

#include "doctest.h"
#include "simdoa/config.hpp"

#include <fstream>

using namespace simdoa;
namespace fs = std::filesystem;

namespace
{
    template <class E>
    std::string message_of(const std::string &text)
    {
        try
        {
            parse_config_text(text, "t.conf");
        }
        catch (const E &e)
        {
            return e.what();
        }
        catch (const std::exception &e)
        {
            return std::string("wrong exception: ") + e.what();
        }
        return "no exception";
    }

    bool contains(const std::string &s, const std::string &part)
    {
        return s.find(part) != std::string::npos;
    }
} // namespace

TEST_CASE("an empty file yields the reference design")
{
    const auto c = parse_config_text("");
    const auto ref = SimGeometry::square(2, 11, 7, 9.0, 0.5);
    CHECK(c.geometry.input == ref.input);
    CHECK(c.geometry.layer == ref.layer);
    CHECK(c.geometry.layers == 7);
    CHECK(c.geometry.thickness == doctest::Approx(9.0 * 5e-3));
    CHECK(c.geometry.wavelength == doctest::Approx(5e-3));
    CHECK(c.geometry.receiver_isomorphic());
    CHECK(c.train.eta0 == 0.2);
    CHECK(c.train.zeta == 0.8);
    CHECK(c.protocol.total() == 1);
    CHECK(std::isinf(c.snr_db));
    CHECK_FALSE(c.stack.has_value());
}

TEST_CASE("values are parsed and converted")
{
    const auto c = parse_config_text(R"(
# a comment
inputs_x = 4      # trailing comment
inputs_y = 4
atoms_x = 12
atoms_y = 12
atom_spacing_lambda = 0.444
t_sim_lambda = 5
layers = 3
tx = 16
ty = 8
eta0 = 0.1
zeta = 0.95
gradient_scaling = none
mc_snr_db = 0, 10, inf
mc_fixed_psi = 0.5:-0.25, 0:0
mc_path = digital
sweep_layers = 1, 2
)");
    CHECK(c.geometry.input.nx == 4);
    CHECK(c.geometry.layer.dx == doctest::Approx(0.444 * 5e-3));
    CHECK(c.geometry.layers == 3);
    CHECK(c.protocol.tx == 16);
    CHECK(c.montecarlo.protocol.ty == 8);
    CHECK(c.montecarlo.nx == 4);
    CHECK(c.train.scaling == GradientScaling::none);
    REQUIRE(c.montecarlo.snr_db.size() == 3);
    CHECK(std::isinf(c.montecarlo.snr_db[2]));
    REQUIRE(c.montecarlo.fixed_sources.size() == 2);
    CHECK(c.montecarlo.fixed_sources[0].psi_y == -0.25);
    CHECK(c.montecarlo.path == EstimatorPath::digital);
    CHECK(c.sweep.layers == std::vector<std::size_t>{1, 2});
    CHECK(c.sweep.atoms_per_side == std::vector<std::size_t>{12});
    CHECK(c.sweep.train.zeta == 0.95);
    CHECK(c.raw.at("zeta") == "0.95");
}

TEST_CASE("physical source angles")
{
    const auto c = parse_config_text("azimuth_deg = 90\nelevation_deg = 30\n");
    CHECK(c.psi_x == doctest::Approx(0.0).epsilon(1e-12).scale(1.0));
    CHECK(c.psi_y == doctest::Approx(0.5));
    CHECK(contains(message_of<ConfigValueError>("psi_x = 0.1\nazimuth_deg = 10\n"), "either"));
    CHECK(contains(message_of<ConfigValueError>("elevation_deg = 100\n"), "elevation_deg"));
}

TEST_CASE("errors name the key and line")
{
    auto m = message_of<ConfigUnknownKeyError>("layers = 3\nfoo = 1\n");
    CHECK(contains(m, "t.conf:2"));
    CHECK(contains(m, "'foo'"));

    m = message_of<ConfigValueError>("atom_spacing_lambda = -0.5\n");
    CHECK(contains(m, "atom_spacing_lambda"));

    m = message_of<ConfigSyntaxError>("layers = three\n");
    CHECK(contains(m, "layers"));

    m = message_of<ConfigSyntaxError>("layers 3\n");
    CHECK(contains(m, "t.conf:1"));

    m = message_of<ConfigSyntaxError>("layers = 3\nlayers = 4\n");
    CHECK(contains(m, "duplicate"));

    CHECK(contains(message_of<ConfigSyntaxError>("layers =\n"), "missing value"));
    CHECK(contains(message_of<ConfigValueError>("zeta = 1.2\n"), "zeta"));
    CHECK(contains(message_of<ConfigValueError>("inputs_x = 0\n"), "inputs_x"));
    CHECK(contains(message_of<ConfigSyntaxError>("mc_fixed_psi = 0.1\n"), "x:y"));
    CHECK(contains(message_of<ConfigValueError>("inputs_x = 3\nsweep_layers = 1,2\n"), "square"));
    CHECK(contains(message_of<ConfigValueError>("mc_snr_db = -inf\n"), "mc_snr_db"));
}

TEST_CASE("overrides replace file values")
{
    const auto c = parse_config_text("zeta = 0.5\nlayers = 3\n", "t.conf", {"zeta=0.9", "tx = 4"});
    CHECK(c.train.zeta == 0.9);
    CHECK(c.geometry.layers == 3);
    CHECK(c.protocol.tx == 4);
    CHECK(c.raw.at("zeta") == "0.9");
    CHECK_THROWS_AS(parse_config_text("", "t", {"zeta=0.9", "zeta=0.8"}), ConfigSyntaxError);
    CHECK_THROWS_AS(parse_config_text("", "t", {"bogus=1"}), ConfigUnknownKeyError);
}

TEST_CASE("files")
{
    CHECK_THROWS_AS(parse_config(fs::temp_directory_path() / "simdoa_no_such.conf"), IoError);
    const auto dir = fs::temp_directory_path() / "simdoa_test_config";
    fs::create_directories(dir);
    std::ofstream(dir / "a.conf") << "stack = trained/stack.csv\n";
    const auto c = parse_config(dir / "a.conf");
    REQUIRE(c.stack.has_value());
    CHECK(*c.stack == dir / "trained/stack.csv");
}

TEST_CASE("every key is documented")
{
    const auto &keys = config_keys();
    CHECK(keys.size() > 30);
    for (const auto &[k, help] : keys)
    {
        CHECK_FALSE(k.empty());
        CHECK_FALSE(help.empty());
    }
}

TEST_CASE("shipped example configs parse")
{
    const fs::path dir = fs::path(SIMDOA_SOURCE_DIR) / "configs";
    std::size_t n = 0;
    for (const auto &e : fs::directory_iterator(dir))
        if (e.path().extension() == ".conf")
        {
            INFO(e.path().string());
            CHECK_NOTHROW(parse_config(e.path()));
            ++n;
        }
    CHECK(n >= 5);
}
