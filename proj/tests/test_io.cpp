// SPDX-License-Identifier: Apache-2.0
//
// radfuse - multi-radar respiratory sensing and signal fusion
// Copyright (C) 2026 The radfuse authors
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


#include <catch2/catch_amalgamated.hpp>

#include "radfuse/io.hpp"
#include "test_support.hpp"

#include <bit>
#include <cstring>
#include <limits>
#include <string>
#include <vector>

using namespace radfuse;

namespace
{

io::CubeFile random_cube(std::uint64_t seed, std::size_t frames)
{
    const RadarConfig cfg = default_radar_config();
    RadarCube cube(cfg.elements(), cfg.fast_samples, frames, cfg.fast_time_rate());
    auto g = rft::rng(seed);
    for (auto &v : cube.data())
        v = {static_cast<float>(rft::uniform(g, -1e3, 1e3)), static_cast<float>(rft::uniform(g, -1e-3, 1e-3))};
    return {cube, cfg, 3};
}

std::size_t parse_offset(const std::string &bytes)
{
    try
    {
        io::decode_cube(bytes);
    }
    catch (const ParseError &e)
    {
        return e.byte_offset();
    }
    FAIL("decode_cube accepted malformed input");
    return 0;
}

std::size_t csv_offset(const std::string &text)
{
    try
    {
        io::decode_csv(text);
    }
    catch (const ParseError &e)
    {
        return e.byte_offset();
    }
    FAIL("decode_csv accepted malformed input");
    return 0;
}

std::size_t header_length(const std::string &bytes)
{
    std::uint32_t n = 0;
    for (int i = 0; i < 4; ++i)
        n |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[6 + i])) << (8 * i);
    return n;
}

} // namespace

TEST_CASE("cube files round-trip bit for bit", "[io]")
{
    for (std::uint64_t seed = 1; seed <= 3; ++seed)
    {
        const auto in = random_cube(seed, 5 + seed);
        const std::string bytes = io::encode_cube(in.cube, in.config, in.radar_id);
        REQUIRE(bytes.compare(0, 4, "RCUB") == 0);
        REQUIRE(static_cast<unsigned char>(bytes[4]) == 1);
        REQUIRE(static_cast<unsigned char>(bytes[5]) == 0);
        REQUIRE(bytes.size() == 10 + header_length(bytes) + 8 * in.cube.data().size());

        const auto out = io::decode_cube(bytes);
        REQUIRE(out.radar_id == 3);
        REQUIRE(out.cube.elements() == in.cube.elements());
        REQUIRE(out.cube.fast() == in.cube.fast());
        REQUIRE(out.cube.frames() == in.cube.frames());
        REQUIRE(out.cube.fast_time_rate() == in.cube.fast_time_rate());
        REQUIRE(std::memcmp(out.cube.data().data(), in.cube.data().data(), in.cube.data().size() * sizeof(in.cube.data()[0])) == 0);
        REQUIRE(out.config.center_freq == in.config.center_freq);
        REQUIRE(out.config.element_positions == in.config.element_positions);
        REQUIRE(out.config.angle_grid == in.config.angle_grid);
        REQUIRE(out.config.range_grid == in.config.range_grid);
        // Re-encoding the decoded file reproduces the same bytes.
        REQUIRE(io::encode_cube(out.cube, out.config, out.radar_id) == bytes);
    }
}

TEST_CASE("malformed cube files report the failing byte offset", "[io]")
{
    const auto in = random_cube(7, 4);
    const std::string good = io::encode_cube(in.cube, in.config, in.radar_id);
    const std::size_t payload = 10 + header_length(good);

    REQUIRE(parse_offset("") == 0);
    REQUIRE(parse_offset("RCUB") == 4);

    std::string bad = good;
    bad[0] = 'X';
    REQUIRE(parse_offset(bad) == 0);

    bad = good;
    bad[4] = 2;
    REQUIRE(parse_offset(bad) == 4);

    bad = good;
    bad[9] = static_cast<char>(0x7f);
    REQUIRE(parse_offset(bad) == 6);

    bad = good;
    bad[10] = '[';
    REQUIRE(parse_offset(bad) >= 10);

    bad = good.substr(0, good.size() - 3);
    REQUIRE(parse_offset(bad) == payload);
    bad = good + std::string(8, '\0');
    REQUIRE(parse_offset(bad) == payload);

    bad = good;
    const auto nan = std::bit_cast<std::uint32_t>(std::numeric_limits<float>::quiet_NaN());
    const std::size_t at = payload + 8 * 5 + 4;
    for (int i = 0; i < 4; ++i)
        bad[at + i] = static_cast<char>((nan >> (8 * i)) & 0xff);
    REQUIRE(parse_offset(bad) == payload + 8 * 5);
}

TEST_CASE("CSV round-trips doubles exactly", "[io]")
{
    auto g = rft::rng(11);
    io::CsvTable t{{"a", "b", "c"}, {}};
    for (int c = 0; c < 3; ++c)
    {
        std::vector<double> col;
        for (int r = 0; r < 40; ++r)
            col.push_back(rft::uniform(g, -1.0, 1.0) * std::pow(10.0, rft::uniform(g, -300.0, 300.0)));
        t.columns.push_back(col);
    }
    t.columns[1][0] = 0.1;
    t.columns[2][0] = -0.0;
    t.columns[0][1] = std::numeric_limits<double>::denorm_min();

    const auto back = io::decode_csv(io::encode_csv(t));
    REQUIRE(back.header == t.header);
    REQUIRE(back.columns.size() == 3);
    for (int c = 0; c < 3; ++c)
        for (std::size_t r = 0; r < 40; ++r)
            REQUIRE(std::bit_cast<std::uint64_t>(back.columns[c][r]) == std::bit_cast<std::uint64_t>(t.columns[c][r]));
}

TEST_CASE("malformed CSV reports offsets", "[io]")
{
    REQUIRE(csv_offset("") == 0);
    REQUIRE(csv_offset("a,b\n1,2\n3,x\n") == 10);
    REQUIRE(csv_offset("a,b\n1,2\n3\n") == 8);
    REQUIRE(csv_offset("a,b\n1,nan\n") == 6);
    REQUIRE(csv_offset("a,b\n1,\n") == 6);
    // CRLF line endings and a trailing blank line are fine.
    const auto t = io::decode_csv("a,b\r\n1,2\r\n\r\n");
    REQUIRE(t.columns[1] == std::vector<double>{2.0});
}

TEST_CASE("displacement tables round-trip and reject uneven time", "[io]")
{
    auto g = rft::rng(5);
    std::vector<RealSeries> ch;
    for (int c = 0; c < 3; ++c)
        ch.emplace_back(rft::gaussian(250, g, 1e-3), 100.0, 0.5);
    const MultiChannelSeries x(ch, {"1", "3", "4"});

    const auto t = io::displacement_table(x);
    REQUIRE(t.header == std::vector<std::string>{"time_s", "radar_1", "radar_3", "radar_4"});
    const auto y = io::displacement_from_table(io::decode_csv(io::encode_csv(t)));
    REQUIRE(y.ids() == x.ids());
    REQUIRE(y.channel_count() == 3);
    for (std::size_t c = 0; c < 3; ++c)
    {
        REQUIRE(y[c].values() == x[c].values());
        REQUIRE_THAT(y[c].sample_rate(), Catch::Matchers::WithinRel(100.0, 1e-12));
        REQUIRE(y[c].start_time() == 0.5);
    }

    auto uneven = t;
    uneven.columns[0][100] += 0.004;
    REQUIRE_THROWS_AS(io::displacement_from_table(uneven), ParseError);
    auto wrong = t;
    wrong.header[0] = "t";
    REQUIRE_THROWS_AS(io::displacement_from_table(wrong), ParseError);

    const std::vector<double> peaks{1.25, 5.5};
    REQUIRE(io::encode_csv(io::peak_table(peaks)) == "peak_time_s\n1.25\n5.5\n");
}

TEST_CASE("JSON configs round-trip and reject unknown keys", "[io]")
{
    VmdConfig v;
    v.modes = 3;
    v.alpha = 1500.0;
    v.init = InitPolicy::Explicit;
    v.init_freqs_hz = {0.1, 0.3, 1.0};
    v.mirror = false;
    const auto v2 = io::vmd_config_from_json(io::to_json(v));
    REQUIRE(v2.modes == 3);
    REQUIRE(v2.alpha == 1500.0);
    REQUIRE(v2.init == InitPolicy::Explicit);
    REQUIRE(v2.init_freqs_hz == v.init_freqs_hz);
    REQUIRE_FALSE(v2.mirror);

    FusionConfig f;
    f.f_rr = 0.22;
    f.max_align_lag = 3.0;
    REQUIRE(io::to_json(io::fusion_config_from_json(io::to_json(f))) == io::to_json(f));

    PeakConfig p{2.0, 0.5};
    REQUIRE(io::to_json(io::peak_config_from_json(io::to_json(p))) == io::to_json(p));

    const RadarConfig r = default_radar_config();
    REQUIRE(io::to_json(io::radar_config_from_json(io::to_json(r))) == io::to_json(r));

    const auto sc = preset_scenario("C2", 9, 15.0, 30.0);
    const auto sc2 = io::scenario_from_json(io::to_json(sc), 9);
    REQUIRE(io::to_json(sc2) == io::to_json(sc));

    auto j = io::to_json(v);
    j["alhpa"] = 1.0;
    REQUIRE_THROWS_AS(io::vmd_config_from_json(j), InvalidInput);
    REQUIRE_THROWS_AS(io::scenario_from_json(io::parse_json(R"({"preset":"C1","sed":3})", "t"), 1), InvalidInput);
    REQUIRE_THROWS_AS(io::parse_json("{\"a\": 1,}", "t"), ParseError);
}
