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

#include "radfuse/radar.hpp"
#include "radfuse/simulator.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

using namespace radfuse;
using Catch::Matchers::WithinAbs;

namespace
{

constexpr double fs = 100.0;

ScenarioConfig one_radar(double subject_range, double snr_db, double seconds)
{
    ScenarioConfig sc;
    sc.duration = seconds;
    sc.seed = 5;
    RadarPlacement r;
    r.snr_db = snr_db;
    sc.radars.push_back(r);
    Subject s;
    s.y = subject_range;
    sc.subjects.push_back(s);
    return sc;
}

std::size_t nearest(const std::vector<double> &grid, double v)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (std::abs(grid[i] - v) < std::abs(grid[best] - v))
            best = i;
    return best;
}

} // namespace

TEST_CASE("breathing: pure sinusoid without jitter")
{
    BreathingModel bm;
    bm.base_rate = 0.25;
    bm.amplitude = 4e-3;
    const auto t = generate_breathing(bm, 60.0, fs, 1);
    REQUIRE(t.displacement.size() == 6000);
    for (std::size_t i = 0; i < 6000; ++i)
        REQUIRE(std::abs(t.displacement[i] - 4e-3 * std::cos(2.0 * rft::pi * 0.25 * static_cast<double>(i) / fs)) < 1e-12);
    REQUIRE(t.peak_times.size() == 15);
    CHECK(t.peak_times.front() == 0.0);
    for (std::size_t i = 1; i < t.peak_times.size(); ++i)
        CHECK_THAT(t.peak_times[i] - t.peak_times[i - 1], WithinAbs(4.0, 1e-9));

    const auto [lo, hi] = std::minmax_element(t.displacement.samples().begin(), t.displacement.samples().end());
    CHECK_THAT(*hi - *lo, WithinAbs(8e-3, 1e-9));
}

TEST_CASE("breathing: jittered rate stays in its band and matches the phase derivative")
{
    BreathingModel bm;
    bm.base_rate = 0.3;
    bm.rate_jitter = 0.1;
    bm.amplitude_jitter = 0.1;
    bm.harmonic_levels = {0.3, 0.1};
    bm.initial_phase = 0.37;
    for (std::uint64_t seed = 1; seed <= 5; ++seed)
    {
        const auto t = generate_breathing(bm, 120.0, fs, seed);
        for (std::size_t i = 0; i < t.rate.size(); ++i)
        {
            REQUIRE(t.rate[i] >= 0.3 * (1.0 - 3.0 * 0.1) - 1e-12);
            REQUIRE(t.rate[i] <= 0.3 * (1.0 + 3.0 * 0.1) + 1e-12);
        }
        // phase increments are the trapezoid of the rate
        for (std::size_t i = 1; i < t.phase.size(); ++i)
        {
            const double slope = (t.phase[i] - t.phase[i - 1]) * fs;
            REQUIRE(slope >= std::min(t.rate[i], t.rate[i - 1]) - 1e-9);
            REQUIRE(slope <= std::max(t.rate[i], t.rate[i - 1]) + 1e-9);
        }
        // peak times sit where the phase crosses an integer
        REQUIRE(!t.peak_times.empty());
        for (double p : t.peak_times)
        {
            const auto i = static_cast<std::size_t>(std::floor(p * fs));
            const double before = t.phase[i], after = t.phase[std::min(i + 1, t.phase.size() - 1)];
            REQUIRE(std::floor(after) - std::floor(before) >= 1.0 - 1e-12);
        }
        for (std::size_t i = 1; i < t.peak_times.size(); ++i)
            REQUIRE(t.peak_times[i] > t.peak_times[i - 1]);
    }
}

TEST_CASE("breathing: deterministic per seed, validated")
{
    BreathingModel bm;
    bm.rate_jitter = 0.05;
    const auto a = generate_breathing(bm, 30.0, fs, 9), b = generate_breathing(bm, 30.0, fs, 9), c = generate_breathing(bm, 30.0, fs, 10);
    CHECK(a.displacement.values() == b.displacement.values());
    CHECK(a.displacement.values() != c.displacement.values());

    bm.amplitude = 20e-3;
    CHECK_THROWS_AS(generate_breathing(bm, 30.0, fs, 1), InvalidInput);
    bm = {};
    bm.base_rate = 0.05;
    CHECK_THROWS_AS(generate_breathing(bm, 30.0, fs, 1), InvalidInput);
}

TEST_CASE("orientation gains")
{
    const OrientationGains g;
    CHECK(g.at(0.0) == 1.0);
    CHECK(g.at(90.0) == 0.4);
    CHECK(g.at(-90.0) == 0.4);
    CHECK(g.at(270.0) == 0.4);
    CHECK(g.at(180.0) == 0.6);
    CHECK_THAT(g.at(45.0), WithinAbs(0.7, 1e-15));
    CHECK_THAT(g.at(135.0), WithinAbs(0.5, 1e-15));
}

TEST_CASE("presets place every radar with the subject in view")
{
    for (const char *id : {"C1", "C2", "C3", "C4", "C5", "C6"})
    {
        const auto sc = preset_scenario(id, 1);
        REQUIRE(sc.radars.size() == 4);
        for (const auto &r : sc.radars)
        {
            const auto geo = subject_geometry(sc, r, sc.subjects[0]);
            CHECK(std::abs(geo.angle) < 1e-9); // each radar aims at the subject
            CHECK(geo.range >= r.config.range_grid.front());
            CHECK(geo.range <= r.config.range_grid.back());
        }
    }
    const auto c1 = preset_scenario("C1", 1), c2 = preset_scenario("C2", 1), c3 = preset_scenario("C3", 1), c4 = preset_scenario("C4", 1);
    CHECK(subject_geometry(c1, c1.radars[1], c1.subjects[0]).gain == 1.0);
    CHECK(subject_geometry(c2, c2.radars[1], c2.subjects[0]).gain == 0.4);
    CHECK(subject_geometry(c3, c3.radars[1], c3.subjects[0]).gain == 0.6);
    CHECK_THAT(subject_geometry(c4, c4.radars[1], c4.subjects[0]).range, WithinAbs(3.0, 1e-12));
    CHECK_THROWS_AS(preset_scenario("C7", 1), InvalidScenario);
}

TEST_CASE("projected displacement moves toward the radar on inhalation")
{
    const auto sc = preset_scenario("C3", 4, 20.0, 20.0);
    const auto truth = scenario_breathing(sc, fs)[0];
    const auto p = projected_displacement(sc, 1, 0, truth);
    for (std::size_t i = 0; i < p.size(); ++i)
        REQUIRE(p[i] == -0.6 * truth.displacement[i]);
}

TEST_CASE("synthesize_cube: shape, determinism, field of view")
{
    const auto sc = one_radar(1.5, 10.0, 2.0);
    const auto a = synthesize_cube(sc, 0), b = synthesize_cube(sc, 0);
    CHECK(a.elements() == 12);
    CHECK(a.fast() == 128);
    CHECK(a.frames() == 200);
    CHECK(a.data() == b.data());
    auto other = sc;
    other.seed = 6;
    CHECK(synthesize_cube(other, 0).data() != a.data());

    CHECK_THROWS_AS(synthesize_cube(one_radar(7.0, 10.0, 1.0), 0), InvalidScenario);
    auto wide = one_radar(1.5, 10.0, 1.0);
    wide.subjects[0].x = 3.0; // 63 deg off boresight
    CHECK_THROWS_AS(synthesize_cube(wide, 0), InvalidScenario);
    auto dup = sc;
    dup.radars.push_back(dup.radars[0]);
    CHECK_THROWS_AS(synthesize_cube(dup, 0), InvalidScenario);
    CHECK_THROWS_AS(synthesize_cube(sc, 3), InvalidInput);
}

TEST_CASE("synthesize_cube: static reflector peaks at its range and vanishes after clutter removal")
{
    auto sc = one_radar(1.5, INFINITY, 4.0);
    sc.subjects[0].breathing.amplitude = 0.5e-3;
    sc.reflectors.push_back({-0.4, 2.2, 20.0});
    const auto cube = synthesize_cube(sc, 0);
    const auto &cfg = sc.radars[0].config;
    const auto rc = range_compress(cube, cfg);
    std::size_t arg = 0;
    for (std::size_t r = 1; r < rc.ranges; ++r)
        if (std::abs(rc.at(0, r, 0)) > std::abs(rc.at(0, arg, 0)))
            arg = r;
    CHECK(arg == nearest(cfg.range_grid, std::hypot(0.4, 2.2)));

    const auto img = remove_clutter(beamform(rc, cfg));
    const auto pm = power_map(img);
    const auto refl_r = nearest(cfg.range_grid, std::hypot(0.4, 2.2));
    const auto refl_a = nearest(cfg.angle_grid, std::atan2(-0.4, 2.2));
    const auto raw = power_map(beamform(rc, cfg));
    CHECK(pm.at(refl_r, refl_a) < 1e-9 * raw.at(refl_r, refl_a));
    const auto cell = strongest_cell(pm);
    CHECK(cell.range_index == nearest(cfg.range_grid, 1.5));
}

TEST_CASE("synthesize_cube: noiseless round trip within 0.1 mm")
{
    auto sc = one_radar(1.5, INFINITY, 40.0);
    sc.subjects[0].breathing.amplitude = 4e-3;
    sc.subjects[0].breathing.base_rate = 0.25;
    const auto track = process_cube(synthesize_cube(sc, 0), sc.radars[0].config);
    const auto truth = projected_displacement(sc, 0, 0, scenario_breathing(sc, fs)[0]);
    CHECK(rft::rms_diff_demeaned(track.displacement.samples(), truth.samples()) < 0.1e-3);
}

TEST_CASE("synthesize_cube: two subjects separated in angle")
{
    ScenarioConfig sc = one_radar(2.0, 20.0, 10.0);
    sc.subjects[0].x = -0.5;
    Subject second;
    second.x = 0.5;
    second.y = 2.0;
    second.breathing.base_rate = 0.31;
    sc.subjects.push_back(second);
    const auto &cfg = sc.radars[0].config;
    const auto pm = power_map(remove_clutter(beamform(range_compress(synthesize_cube(sc, 0), cfg), cfg)));

    const double range = std::hypot(0.5, 2.0);
    const auto r = nearest(cfg.range_grid, range);
    const auto a1 = nearest(cfg.angle_grid, std::atan2(-0.5, 2.0)), a2 = nearest(cfg.angle_grid, std::atan2(0.5, 2.0));
    // local maxima of the power map in the subjects' range row
    std::vector<std::size_t> peaks;
    double top = 0.0;
    for (std::size_t a = 0; a < pm.angles; ++a)
        top = std::max(top, pm.at(r, a));
    for (std::size_t a = 1; a + 1 < pm.angles; ++a)
        if (pm.at(r, a) > pm.at(r, a - 1) && pm.at(r, a) >= pm.at(r, a + 1) && pm.at(r, a) > 0.25 * top)
            peaks.push_back(a);
    REQUIRE(peaks.size() == 2);
    CHECK(std::abs(static_cast<long>(peaks[0]) - static_cast<long>(a1)) <= 1);
    CHECK(std::abs(static_cast<long>(peaks[1]) - static_cast<long>(a2)) <= 1);
}

TEST_CASE("synthesize_cube: post-compression SNR matches the configured value")
{
    for (double range : {1.5, 20 * default_radar_config().range_resolution()})
    {
        for (double snr : {0.0, 10.0, 20.0})
        {
            auto sc = one_radar(range, snr, 5.0);
            sc.subjects[0].breathing.amplitude = 0.5e-3;
            const auto &cfg = sc.radars[0].config;
            const auto clean = [&] {
                auto q = sc;
                q.radars[0].snr_db = INFINITY;
                return range_compress(synthesize_cube(q, 0), cfg);
            }();
            const auto noisy = range_compress(synthesize_cube(sc, 0), cfg);
            const auto r = nearest(cfg.range_grid, range);
            double ps = 0.0, pn = 0.0;
            std::size_t count = 0;
            for (std::size_t m = 0; m < noisy.elements; ++m)
                for (std::size_t t = 0; t < noisy.frames; ++t)
                {
                    ps += std::norm(clean.at(m, r, t));
                    pn += std::norm(noisy.at(m, r, t) - clean.at(m, r, t));
                    ++count;
                }
            const double measured = 10.0 * std::log10(ps / pn);
            const bool on_bin = std::abs(range / cfg.range_resolution() - std::round(range / cfg.range_resolution())) < 1e-9;
            CHECK(std::abs(measured - snr) < (on_bin ? 0.5 : 2.0));
        }
    }
}
