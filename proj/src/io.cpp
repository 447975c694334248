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

#include "simdoa/io.hpp"

#include <bit>
#include <charconv>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

#include "json.hpp"

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

namespace simdoa
{
    namespace
    {
        std::ofstream open_out(const std::filesystem::path &path, bool binary)
        {
            std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
            if (!out)
                throw IoError("cannot open '" + path.string() + "' for writing");
            return out;
        }

        std::ifstream open_in(const std::filesystem::path &path, bool binary)
        {
            std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
            if (!in)
                throw IoError("cannot open '" + path.string() + "'");
            return in;
        }

        double parse_double(const std::string &s, const std::filesystem::path &path, std::size_t line)
        {
            double v = 0.0;
            const char *b = s.data(), *e = s.data() + s.size();
            auto [p, ec] = std::from_chars(b, e, v);
            if (ec != std::errc() || p != e)
                throw IoError(path.string() + ":" + std::to_string(line) + ": bad number '" + s + "'");
            return v;
        }

        std::size_t parse_index(const std::string &s, const std::filesystem::path &path, std::size_t line)
        {
            std::size_t v = 0;
            const char *b = s.data(), *e = s.data() + s.size();
            auto [p, ec] = std::from_chars(b, e, v);
            if (ec != std::errc() || p != e)
                throw IoError(path.string() + ":" + std::to_string(line) + ": bad index '" + s + "'");
            return v;
        }

        // Splits the data lines of a CSV with a fixed header.
        std::vector<std::vector<std::string>> read_csv(const std::filesystem::path &path, const std::string &header,
                                                       std::size_t fields)
        {
            auto in = open_in(path, false);
            std::string line;
            if (!std::getline(in, line) || line != header)
                throw IoError(path.string() + ": expected header '" + header + "'");
            std::vector<std::vector<std::string>> rows;
            std::size_t n = 1;
            while (std::getline(in, line))
            {
                ++n;
                if (line.empty())
                    continue;
                std::vector<std::string> cells;
                std::stringstream ss(line);
                std::string cell;
                while (std::getline(ss, cell, ','))
                    cells.push_back(cell);
                if (cells.size() != fields)
                    throw IoError(path.string() + ":" + std::to_string(n) + ": expected " + std::to_string(fields) +
                                  " fields");
                rows.push_back(std::move(cells));
            }
            return rows;
        }

        template <class T>
        void put(std::ostream &out, T v)
        {
            out.write(reinterpret_cast<const char *>(&v), sizeof(T));
        }

        template <class T>
        T get(std::istream &in, const std::filesystem::path &path)
        {
            T v{};
            if (!in.read(reinterpret_cast<char *>(&v), sizeof(T)))
                throw IoError(path.string() + ": truncated file");
            return v;
        }

        void check_magic(std::istream &in, const char *magic, const std::filesystem::path &path)
        {
            char buf[8];
            if (!in.read(buf, 8) || std::memcmp(buf, magic, 8) != 0)
                throw IoError(path.string() + ": not a " + std::string(magic, 8) + " file");
            const auto version = get<std::uint32_t>(in, path);
            if (version != matrix_format_version)
                throw IoError(path.string() + ": unsupported format version " + std::to_string(version));
        }

        bool has_extension(const std::filesystem::path &p, const char *ext)
        {
            return p.extension() == ext;
        }
    } // namespace

    std::string format_double(double v)
    {
        char buf[32];
        auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
        return std::string(buf, p);
    }

    void write_matrix_csv(const std::filesystem::path &path, const CMatrix &m)
    {
        auto out = open_out(path, false);
        out << "row,col,re,im\n";
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c)
                out << r << ',' << c << ',' << format_double(m(r, c).real()) << ',' << format_double(m(r, c).imag())
                    << '\n';
        if (!out)
            throw IoError("write failed: " + path.string());
    }

    CMatrix read_matrix_csv(const std::filesystem::path &path)
    {
        const auto rows = read_csv(path, "row,col,re,im", 4);
        std::size_t nr = 0, nc = 0;
        std::size_t line = 1;
        for (const auto &r : rows)
        {
            ++line;
            nr = std::max(nr, parse_index(r[0], path, line) + 1);
            nc = std::max(nc, parse_index(r[1], path, line) + 1);
        }
        if (rows.size() != nr * nc)
            throw IoError(path.string() + ": matrix entries are missing or duplicated");
        CMatrix m = CMatrix::Constant(static_cast<Eigen::Index>(nr), static_cast<Eigen::Index>(nc),
                                      cplx(std::numeric_limits<double>::quiet_NaN(), 0.0));
        std::vector<bool> seen(nr * nc, false);
        line = 1;
        for (const auto &r : rows)
        {
            ++line;
            const auto i = parse_index(r[0], path, line), j = parse_index(r[1], path, line);
            if (seen[i * nc + j])
                throw IoError(path.string() + ":" + std::to_string(line) + ": duplicate entry");
            seen[i * nc + j] = true;
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = {parse_double(r[2], path, line),
                                                                             parse_double(r[3], path, line)};
        }
        return m;
    }

    void write_matrix_binary(const std::filesystem::path &path, const CMatrix &m)
    {
        auto out = open_out(path, true);
        out.write("SIMDOAMX", 8);
        put<std::uint32_t>(out, matrix_format_version);
        put<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
        put<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
        out.write(reinterpret_cast<const char *>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(cplx)));
        if (!out)
            throw IoError("write failed: " + path.string());
    }

    CMatrix read_matrix_binary(const std::filesystem::path &path)
    {
        auto in = open_in(path, true);
        check_magic(in, "SIMDOAMX", path);
        const auto rows = get<std::uint64_t>(in, path), cols = get<std::uint64_t>(in, path);
        if (rows > (1u << 20) || cols > (1u << 20))
            throw IoError(path.string() + ": implausible matrix size");
        CMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        if (!in.read(reinterpret_cast<char *>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(cplx))))
            throw IoError(path.string() + ": truncated file");
        return m;
    }

    void write_stack_csv(const std::filesystem::path &path, const PhaseStack &s)
    {
        auto out = open_out(path, false);
        out << "layer,atom,phase\n";
        for (std::size_t l = 1; l <= s.layers(); ++l)
            for (std::size_t m = 0; m < s.atoms(); ++m)
                out << l << ',' << m + 1 << ',' << format_double(s.phases(l)(static_cast<Eigen::Index>(m))) << '\n';
        if (!out)
            throw IoError("write failed: " + path.string());
    }

    PhaseStack read_stack_csv(const std::filesystem::path &path)
    {
        const auto rows = read_csv(path, "layer,atom,phase", 3);
        std::size_t layers = 0, atoms = 0, line = 1;
        for (const auto &r : rows)
        {
            ++line;
            layers = std::max(layers, parse_index(r[0], path, line));
            atoms = std::max(atoms, parse_index(r[1], path, line));
        }
        if (rows.size() != layers * atoms || layers == 0)
            throw IoError(path.string() + ": phase entries are missing or duplicated");
        std::vector<RVector> phases(layers, RVector::Zero(static_cast<Eigen::Index>(atoms)));
        std::vector<bool> seen(layers * atoms, false);
        line = 1;
        for (const auto &r : rows)
        {
            ++line;
            const auto l = parse_index(r[0], path, line), m = parse_index(r[1], path, line);
            if (l == 0 || m == 0)
                throw IoError(path.string() + ":" + std::to_string(line) + ": indices are 1-based");
            if (seen[(l - 1) * atoms + (m - 1)])
                throw IoError(path.string() + ":" + std::to_string(line) + ": duplicate entry");
            seen[(l - 1) * atoms + (m - 1)] = true;
            auto &slot = phases[l - 1](static_cast<Eigen::Index>(m - 1));
            slot = parse_double(r[2], path, line);
            if (!std::isfinite(slot))
                throw IoError(path.string() + ":" + std::to_string(line) + ": phase must be finite");
        }
        return PhaseStack(std::move(phases));
    }

    void write_stack_binary(const std::filesystem::path &path, const PhaseStack &s)
    {
        auto out = open_out(path, true);
        out.write("SIMDOAPS", 8);
        put<std::uint32_t>(out, matrix_format_version);
        put<std::uint64_t>(out, s.layers());
        put<std::uint64_t>(out, s.atoms());
        for (std::size_t l = 1; l <= s.layers(); ++l)
            out.write(reinterpret_cast<const char *>(s.phases(l).data()),
                      static_cast<std::streamsize>(s.atoms() * sizeof(double)));
        if (!out)
            throw IoError("write failed: " + path.string());
    }

    PhaseStack read_stack_binary(const std::filesystem::path &path)
    {
        auto in = open_in(path, true);
        check_magic(in, "SIMDOAPS", path);
        const auto layers = get<std::uint64_t>(in, path), atoms = get<std::uint64_t>(in, path);
        if (layers == 0 || layers > 4096 || atoms > (1u << 24))
            throw IoError(path.string() + ": implausible stack size");
        std::vector<RVector> phases(layers, RVector(static_cast<Eigen::Index>(atoms)));
        for (auto &p : phases)
            if (!in.read(reinterpret_cast<char *>(p.data()), static_cast<std::streamsize>(atoms * sizeof(double))))
                throw IoError(path.string() + ": truncated file");
        return PhaseStack(std::move(phases));
    }

    void write_stack(const std::filesystem::path &path, const PhaseStack &s)
    {
        if (has_extension(path, ".bin"))
            write_stack_binary(path, s);
        else
            write_stack_csv(path, s);
    }

    PhaseStack read_stack(const std::filesystem::path &path)
    {
        return has_extension(path, ".bin") ? read_stack_binary(path) : read_stack_csv(path);
    }

    std::string utc_timestamp()
    {
        const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm tm{};
        gmtime_r(&now, &tm);
        char buf[32];
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
        return buf;
    }

    std::string RunManifest::to_json() const
    {
        nlohmann::ordered_json j;
        j["tool"] = tool;
        j["version"] = version;
        j["command"] = command;
        j["started_utc"] = started_utc;
        j["finished_utc"] = finished_utc;
        j["geometry_hash"] = geometry_hash;
        j["seeds"] = seeds;
        j["config"] = config;
        j["notes"] = notes;
        j["outputs"] = nlohmann::ordered_json::array();
        for (const auto &o : outputs)
            j["outputs"].push_back({{"path", o.path}, {"kind", o.kind}});
        return j.dump(2) + "\n";
    }

    RunManifest RunManifest::from_json(const std::string &text)
    {
        try
        {
            const auto j = nlohmann::json::parse(text);
            RunManifest m;
            m.tool = j.at("tool").get<std::string>();
            m.version = j.at("version").get<std::string>();
            m.command = j.at("command").get<std::string>();
            m.started_utc = j.at("started_utc").get<std::string>();
            m.finished_utc = j.at("finished_utc").get<std::string>();
            m.geometry_hash = j.at("geometry_hash").get<std::string>();
            m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
            m.config = j.at("config").get<std::map<std::string, std::string>>();
            m.notes = j.at("notes").get<std::map<std::string, std::string>>();
            for (const auto &o : j.at("outputs"))
                m.outputs.push_back({o.at("path").get<std::string>(), o.at("kind").get<std::string>()});
            return m;
        }
        catch (const nlohmann::json::exception &e)
        {
            throw IoError(std::string("malformed manifest: ") + e.what());
        }
    }

    void RunManifest::write(const std::filesystem::path &path) const
    {
        auto out = open_out(path, false);
        out << to_json();
        if (!out)
            throw IoError("write failed: " + path.string());
    }

    RunManifest RunManifest::read(const std::filesystem::path &path)
    {
        auto in = open_in(path, false);
        std::stringstream ss;
        ss << in.rdbuf();
        return from_json(ss.str());
    }
} // namespace simdoa
