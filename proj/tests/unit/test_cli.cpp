// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The simdoa authors

#include "doctest.h"
#include "simdoa/cli.hpp"
#include "simdoa/io.hpp"

#include "json.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace simdoa;
namespace fs = std::filesystem;

namespace
{
    struct Run
    {
        int code = -1;
        std::string out, err;
    };

    Run cli(std::vector<std::string> args)
    {
        args.insert(args.begin(), "simdoa");
        std::ostringstream out, err;
        Run r;
        r.code = run_cli(args, out, err);
        r.out = out.str();
        r.err = err.str();
        return r;
    }

    fs::path fresh_dir(const std::string &name)
    {
        const auto d = fs::temp_directory_path() / "simdoa_test_cli" / name;
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }

    std::string slurp(const fs::path &p)
    {
        std::ifstream in(p);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    // Small stack so the in-process tests stay fast.
    const std::vector<std::string> small = {"--set", "atoms_x=4", "--set", "atoms_y=4", "--set", "layers=2",
                                            "--set", "t_sim_lambda=3", "--set", "iterations=20"};

    std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string> &b)
    {
        a.insert(a.end(), b.begin(), b.end());
        return a;
    }
} // namespace

TEST_CASE("usage errors exit with 2")
{
    CHECK(cli({}).code == exit_usage);
    CHECK(cli({"frobnicate"}).code == exit_usage);
    CHECK(cli({"fit", "--no-such-flag"}).code == exit_usage);
    CHECK(cli({"fit", "--format", "xml"}).code == exit_usage);

    const auto dir = fresh_dir("usage");
    auto r = cli({"fit", "-o", dir.string(), "--set", "bogus=1"});
    CHECK(r.code == exit_usage);
    CHECK(r.err.find("bogus") != std::string::npos);
    r = cli({"fit", "-o", dir.string(), "--set", "atom_spacing_lambda=-1"});
    CHECK(r.code == exit_usage);
    CHECK(r.err.find("atom_spacing_lambda") != std::string::npos);
    CHECK(cli({"fit", "-c", (dir / "missing.conf").string()}).code == exit_usage);
}

TEST_CASE("help and version")
{
    auto r = cli({"--help"});
    CHECK(r.code == exit_ok);
    CHECK(r.out.find("montecarlo") != std::string::npos);
    r = cli({"--version"});
    CHECK(r.code == exit_ok);
    CHECK(r.out.find(version_string()) != std::string::npos);
}

TEST_CASE("fit writes artifacts and a manifest")
{
    const auto dir = fresh_dir("fit");
    const auto r = cli(with({"fit", "-o", dir.string()}, small));
    REQUIRE(r.code == exit_ok);
    const auto m = RunManifest::read(dir / "manifest.json");
    CHECK(m.command == "fit");
    CHECK(m.config.at("layers") == "2");
    CHECK(m.seeds == std::vector<std::uint64_t>{1});
    CHECK_FALSE(m.geometry_hash.empty());
    for (const auto &o : m.outputs)
        CHECK(fs::exists(dir / o.path));
    CHECK(fs::exists(dir / "stack.csv"));
    CHECK(fs::exists(dir / "response.bin"));
    CHECK(read_stack(dir / "stack.bin") == read_stack(dir / "stack.csv"));
}

TEST_CASE("estimate reuses a saved stack")
{
    const auto dir = fresh_dir("estimate");
    REQUIRE(cli(with({"fit", "-o", (dir / "fit").string()}, small)).code == exit_ok);
    const auto stack = (dir / "fit" / "stack.csv").string();
    auto r = cli(with({"estimate", "-o", (dir / "est").string(), "--set", "stack=" + stack, "--set", "tx=8", "--set",
                       "ty=8", "--set", "psi_x=0.25", "--set", "psi_y=-0.5"},
                      small));
    REQUIRE(r.code == exit_ok);
    const auto j = nlohmann::json::parse(slurp(dir / "est" / "estimate.json"));
    CHECK(j.at("truth").at("psi_x").get<double>() == 0.25);
    CHECK(j.at("electrical").contains("psi_y"));
    CHECK(j.at("physical").at("realizable").is_boolean());
    const auto m = RunManifest::read(dir / "est" / "manifest.json");
    CHECK(m.notes.at("stack") == stack);

    // A stack that does not fit the geometry is a runtime error.
    r = cli({"estimate", "-o", (dir / "bad").string(), "--set", "stack=" + stack});
    CHECK(r.code == exit_runtime);
    r = cli({"estimate", "-o", (dir / "bad").string(), "--set", "stack=" + (dir / "nope.csv").string()});
    CHECK(r.code == exit_runtime);
}

TEST_CASE("spectrum peaks at the source")
{
    const auto dir = fresh_dir("spectrum");
    const auto conf = (fs::path(SIMDOA_SOURCE_DIR) / "configs" / "spectrum.conf").string();
    const auto r = cli({"spectrum", "-c", conf, "-o", dir.string(), "--format", "json"});
    REQUIRE(r.code == exit_ok);
    const auto j = nlohmann::json::parse(slurp(dir / "spectrum.json"));
    REQUIRE(j.is_array());
    CHECK(j.size() == 128 * 128);
    double best = -1.0, bx = 0.0, by = 0.0;
    for (const auto &row : j)
        if (row.at("power").get<double>() > best)
        {
            best = row.at("power").get<double>();
            bx = row.at("psi_x").get<double>();
            by = row.at("psi_y").get<double>();
        }
    CHECK(best == doctest::Approx(1.0));
    CHECK(std::abs(bx - 0.48) <= 2.0 / 128);
    CHECK(std::abs(by - 0.23) <= 2.0 / 128);
}

TEST_CASE("montecarlo, bound and sweep commands")
{
    const auto dir = fresh_dir("mc");
    auto r = cli(with({"montecarlo", "-o", (dir / "mc").string(), "--set", "tx=4", "--set", "ty=4", "--set",
                       "mc_trials=10", "--set", "mc_snr_db=0,20", "-j", "2"},
                      small));
    REQUIRE(r.code == exit_ok);
    const auto table = slurp(dir / "mc" / "montecarlo.csv");
    CHECK(table.find("mse_x") != std::string::npos);
    CHECK(r.out.find("fewer than 30 trials") != std::string::npos);

    r = cli(with({"bound", "-o", (dir / "bound").string(), "--set", "tx=4", "--set", "ty=4", "--set", "mc_trials=5"},
                 small));
    CHECK(r.code == exit_ok);
    CHECK(fs::exists(dir / "bound" / "bound.csv"));

    r = cli(with({"sweep", "-o", (dir / "sweep").string(), "--set", "sweep_atoms_per_side=1,4", "--set",
                  "sweep_runs=2"},
                 small));
    CHECK(r.code == exit_ok);
    CHECK(slurp(dir / "sweep" / "sweep.csv").find(",false,") != std::string::npos);

    r = cli(with({"sweep", "--kind", "receiver", "-o", (dir / "rx").string(), "--set", "rx_spacing_lambda=0.5",
                  "--set", "sweep_runs=1"},
                 small));
    CHECK(r.code == exit_ok);
    CHECK(fs::exists(dir / "rx" / "receiver_study.csv"));
}

TEST_CASE("output directory from the environment")
{
    const auto dir = fresh_dir("env");
    ::setenv(output_dir_env, dir.string().c_str(), 1);
    const auto r = cli(with({"fit"}, small));
    ::unsetenv(output_dir_env);
    CHECK(r.code == exit_ok);
    CHECK(fs::exists(dir / "manifest.json"));
}

TEST_CASE("gradcheck")
{
    auto r = cli({"gradcheck"});
    CHECK(r.code == exit_ok);
    CHECK(r.out.find("max relative error") != std::string::npos);
    r = cli({"gradcheck", "--instances", "2", "--tolerance", "0"});
    CHECK(r.code == exit_runtime);
}
