// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The simdoa authors

#include "doctest.h"
#include "simdoa/io.hpp"

#include <cstring>
#include <fstream>
#include <limits>
#include <random>

using namespace simdoa;
namespace fs = std::filesystem;

namespace
{
    fs::path scratch(const std::string &name)
    {
        const auto dir = fs::temp_directory_path() / "simdoa_test_io";
        fs::create_directories(dir);
        return dir / name;
    }

    // Bitwise equality, so -0.0 and 0.0 are told apart.
    bool same_bits(double a, double b)
    {
        return std::memcmp(&a, &b, sizeof a) == 0;
    }

    CMatrix awkward_matrix()
    {
        std::mt19937_64 rng(4);
        std::normal_distribution<double> n;
        CMatrix m(3, 5);
        for (auto &x : m.reshaped())
            x = {n(rng) * 1e3, n(rng) * 1e-7};
        m(0, 0) = {-0.0, 0.1};
        m(1, 1) = {std::numeric_limits<double>::denorm_min(), std::numeric_limits<double>::max()};
        m(2, 4) = {1.0 / 3.0, -std::numeric_limits<double>::min()};
        return m;
    }

    void write_text(const fs::path &p, const std::string &s)
    {
        std::ofstream(p) << s;
    }
} // namespace

TEST_CASE("matrix round trips are bit-exact")
{
    const CMatrix m = awkward_matrix();
    for (bool binary : {false, true})
    {
        const auto p = scratch(binary ? "m.bin" : "m.csv");
        binary ? write_matrix_binary(p, m) : write_matrix_csv(p, m);
        const CMatrix r = binary ? read_matrix_binary(p) : read_matrix_csv(p);
        REQUIRE(r.rows() == m.rows());
        REQUIRE(r.cols() == m.cols());
        for (Eigen::Index i = 0; i < m.size(); ++i)
        {
            CHECK(same_bits(r.reshaped()(i).real(), m.reshaped()(i).real()));
            CHECK(same_bits(r.reshaped()(i).imag(), m.reshaped()(i).imag()));
        }
    }
}

TEST_CASE("phase stack round trips are bit-exact")
{
    std::mt19937_64 rng(9);
    const auto s = PhaseStack::random(4, 7, rng);
    for (const char *name : {"s.csv", "s.bin"})
    {
        const auto p = scratch(name);
        write_stack(p, s);
        const auto r = read_stack(p);
        CHECK(r == s);
    }
}

TEST_CASE("malformed files raise I/O errors")
{
    CHECK_THROWS_AS(read_matrix_csv(scratch("does_not_exist.csv")), IoError);
    CHECK_THROWS_AS(read_stack_binary(scratch("does_not_exist.bin")), IoError);

    auto p = scratch("bad_magic.bin");
    write_text(p, "NOTAMATRIX-FILE-AT-ALL-------------");
    CHECK_THROWS_AS(read_matrix_binary(p), IoError);

    write_matrix_binary(p = scratch("trunc.bin"), awkward_matrix());
    fs::resize_file(p, fs::file_size(p) - 5);
    CHECK_THROWS_AS(read_matrix_binary(p), IoError);

    write_text(p = scratch("dup.csv"), "layer,atom,phase\n1,1,0.5\n1,2,0.1\n1,1,0.3\n1,2,0.2\n");
    CHECK_THROWS_AS(read_stack_csv(p), IoError);

    write_text(p = scratch("gap.csv"), "layer,atom,phase\n1,1,0.5\n1,3,0.1\n");
    CHECK_THROWS_AS(read_stack_csv(p), IoError);

    write_text(p = scratch("garbage.csv"), "row,col,re,im\n0,0,abc,1\n");
    CHECK_THROWS_AS(read_matrix_csv(p), IoError);

    write_text(p = scratch("header.csv"), "x,y\n");
    CHECK_THROWS_AS(read_matrix_csv(p), IoError);
}

TEST_CASE("formatted doubles parse back exactly")
{
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0})
        CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("run manifest")
{
    RunManifest m;
    m.version = "1.2.3";
    m.command = "fit";
    m.started_utc = utc_timestamp();
    m.finished_utc = m.started_utc;
    m.config = {{"layers", "7"}, {"zeta", "0.8"}};
    m.seeds = {1, 18446744073709551615ull};
    m.geometry_hash = "00ff";
    m.notes = {{"a", "b \"quoted\""}};
    m.outputs = {{"stack.csv", "phase_stack_csv"}, {"manifest.json", "manifest"}};
    CHECK(RunManifest::from_json(m.to_json()) == m);

    const auto p = scratch("manifest.json");
    m.write(p);
    CHECK(RunManifest::read(p) == m);

    CHECK(m.started_utc.size() == 20);
    CHECK(m.started_utc.back() == 'Z');
    CHECK_THROWS_AS(RunManifest::from_json("{not json"), IoError);
    CHECK_THROWS_AS(RunManifest::from_json("{\"tool\": 3}"), IoError);
}
