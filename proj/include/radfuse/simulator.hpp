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

#pragma once

// Ground-truth breathing generator and FMCW point-scatterer IQ synthesis.

#include "radfuse/dsp.hpp"
#include "radfuse/error.hpp"
#include "radfuse/radar.hpp"
#include "radfuse/series.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace radfuse
{

struct BreathingModel
{
    double base_rate = 0.25;              // Hz
    double amplitude = 4e-3;              // m, half peak-to-peak of the fundamental
    std::vector<double> harmonic_levels;  // relative levels of harmonics 2..H
    double rate_jitter = 0.0;             // stationary std of the fractional rate deviation
    double amplitude_jitter = 0.0;        // stationary std of the fractional amplitude deviation
    double jitter_time_constant = 10.0;   // s
    double initial_phase = 0.0;           // cycles; peaks sit where the phase is an integer

    void validate() const
    {
        detail::require(base_rate >= 0.1 && base_rate <= 0.7, "BreathingModel: base rate must lie in [0.1, 0.7] Hz");
        detail::require(amplitude >= 0.5e-3 && amplitude <= 15e-3, "BreathingModel: amplitude must lie in [0.5, 15] mm");
        for (double a : harmonic_levels)
            detail::require(a >= 0.0 && std::isfinite(a), "BreathingModel: harmonic levels must be non-negative");
        detail::require(rate_jitter >= 0.0 && rate_jitter < 1.0 / 3.0, "BreathingModel: rate jitter must lie in [0, 1/3)");
        detail::require(amplitude_jitter >= 0.0 && amplitude_jitter < 1.0 / 3.0,
                        "BreathingModel: amplitude jitter must lie in [0, 1/3)");
        detail::require(jitter_time_constant > 0.0, "BreathingModel: jitter time constant must be positive");
        detail::require(std::isfinite(initial_phase), "BreathingModel: initial phase must be finite");
    }
};

struct BreathingTruth
{
    RealSeries displacement;         // chest displacement, m (positive = expansion)
    std::vector<double> rate;        // instantaneous breathing rate, Hz
    std::vector<double> phase;       // cycles
    std::vector<double> peak_times;  // s, where the phase crosses an integer
};

namespace detail
{

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) { return splitmix64(seed ^ splitmix64(stream)); }

// Ornstein-Uhlenbeck path with stationary std sigma, clipped to +-3 sigma.
inline std::vector<double> ou_path(std::size_t n, double dt, double sigma, double tc, std::mt19937_64 &rng)
{
    std::vector<double> out(n, 0.0);
    if (sigma == 0.0)
        return out;
    std::normal_distribution<double> normal(0.0, 1.0);
    const double decay = std::exp(-dt / tc);
    const double kick = sigma * std::sqrt(1.0 - decay * decay);
    double v = sigma * normal(rng);
    for (std::size_t i = 0; i < n; ++i)
    {
        out[i] = std::clamp(v, -3.0 * sigma, 3.0 * sigma);
        v = v * decay + kick * normal(rng);
    }
    return out;
}

} // namespace detail

// amplitude * (1 + a(t)) * sum_h level_h cos(2 pi h phi(t)), level_1 = 1, with
// phi' = base_rate * (1 + j(t)) integrated exactly for the piecewise-linear rate.
// Every harmonic peaks at integer phi, so the peak times are known exactly.
inline BreathingTruth generate_breathing(const BreathingModel &model, double duration, double sample_rate,
                                         std::uint64_t seed)
{
    model.validate();
    detail::require(duration > 0.0 && sample_rate > 0.0, "generate_breathing: duration and sample rate must be positive");
    const auto n = static_cast<std::size_t>(std::llround(duration * sample_rate));
    detail::require(n >= 2, "generate_breathing: fewer than 2 samples");
    const double dt = 1.0 / sample_rate;

    std::mt19937_64 rng(detail::derive_seed(seed, 0x62726561ULL));
    const auto rate_dev = detail::ou_path(n, dt, model.rate_jitter, model.jitter_time_constant, rng);
    const auto amp_dev = detail::ou_path(n, dt, model.amplitude_jitter, model.jitter_time_constant, rng);

    BreathingTruth truth{RealSeries(std::vector<double>(n, 0.0), sample_rate), {}, {}, {}};
    truth.rate.resize(n);
    truth.phase.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        truth.rate[i] = model.base_rate * (1.0 + rate_dev[i]);
    truth.phase[0] = model.initial_phase;
    for (std::size_t i = 1; i < n; ++i)
        truth.phase[i] = truth.phase[i - 1] + 0.5 * (truth.rate[i - 1] + truth.rate[i]) * dt;

    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        const double arg = 2.0 * std::numbers::pi * truth.phase[i];
        double s = std::cos(arg);
        for (std::size_t h = 0; h < model.harmonic_levels.size(); ++h)
            s += model.harmonic_levels[h] * std::cos(static_cast<double>(h + 2) * arg);
        x[i] = model.amplitude * (1.0 + amp_dev[i]) * s;
    }
    truth.displacement = RealSeries(std::move(x), sample_rate);

    // phi(t_i + s) = phi_i + r_i s + (r_{i+1} - r_i) s^2 / (2 dt)
    if (std::floor(truth.phase[0]) == truth.phase[0])
        truth.peak_times.push_back(0.0);
    for (std::size_t i = 0; i + 1 < n; ++i)
    {
        const double target = std::floor(truth.phase[i]) + 1.0;
        if (truth.phase[i + 1] < target)
            continue;
        const double c = truth.phase[i] - target;
        const double b = truth.rate[i];
        const double a = (truth.rate[i + 1] - truth.rate[i]) / (2.0 * dt);
        double s;
        if (std::abs(a) * dt < 1e-12 * b)
            s = -c / b;
        else
            s = 2.0 * (-c) / (b + std::sqrt(b * b - 4.0 * a * c)); // stable root of a s^2 + b s + c
        truth.peak_times.push_back(static_cast<double>(i) * dt + std::clamp(s, 0.0, dt));
    }
    return truth;
}

// ---------------------------------------------------------------------------
// Scenes
// ---------------------------------------------------------------------------

// Scalar displacement gain versus the angle between the subject's facing
// direction and the direction to the radar, piecewise linear through
// front (0 deg), side (90 deg) and back (180 deg).
struct OrientationGains
{
    double front = 1.0;
    double side = 0.4;
    double back = 0.6;

    double at(double psi_deg) const
    {
        double psi = std::fmod(std::abs(psi_deg), 360.0);
        if (psi > 180.0)
            psi = 360.0 - psi;
        if (psi <= 90.0)
            return front + (side - front) * psi / 90.0;
        return side + (back - side) * (psi - 90.0) / 90.0;
    }
};

// Positions are (x, y) in meters. Bearings are degrees clockwise from +y.
struct RadarPlacement
{
    int id = 1;
    double x = 0.0, y = 0.0;
    double boresight_deg = 0.0;
    double snr_db = 20.0; // post range compression, per element; +inf disables noise
    RadarConfig config = default_radar_config();
};

struct Subject
{
    double x = 0.0, y = 1.5;
    double facing_deg = 180.0;
    double reflectivity = 1.0;
    BreathingModel breathing;
};

struct StaticReflector
{
    double x = 0.0, y = 0.0;
    double reflectivity = 1.0;
};

struct ScenarioConfig
{
    std::string name = "custom";
    std::vector<RadarPlacement> radars;
    std::vector<Subject> subjects;
    std::vector<StaticReflector> reflectors;
    OrientationGains gains;
    double duration = 60.0;
    std::uint64_t seed = 0;

    void validate() const
    {
        if (!(duration > 0.0 && std::isfinite(duration)))
            throw InvalidScenario("scenario duration must be positive");
        if (radars.empty() || subjects.empty())
            throw InvalidScenario("scenario needs at least one radar and one subject");
        for (const auto &r : radars)
        {
            r.config.validate();
            if (std::isnan(r.snr_db))
                throw InvalidScenario("radar SNR must not be NaN");
        }
        for (std::size_t i = 0; i < radars.size(); ++i)
            for (std::size_t j = i + 1; j < radars.size(); ++j)
                if (radars[i].id == radars[j].id)
                    throw InvalidScenario("radar ids must be unique");
        for (const auto &s : subjects)
        {
            s.breathing.validate();
            if (!(s.reflectivity > 0.0))
                throw InvalidScenario("subject reflectivity must be positive");
        }
    }
};

inline double bearing_deg(double dx, double dy) { return rad2deg(std::atan2(dx, dy)); }

inline double wrap_deg(double a)
{
    a = std::fmod(a + 180.0, 360.0);
    if (a < 0.0)
        a += 360.0;
    return a - 180.0;
}

struct Geometry
{
    double range = 0.0;     // m
    double angle = 0.0;     // rad, relative to boresight, positive clockwise
    double psi_deg = 0.0;   // angle between facing direction and direction to the radar
    double gain = 0.0;      // displacement gain
};

inline Geometry subject_geometry(const ScenarioConfig &sc, const RadarPlacement &radar, const Subject &s)
{
    Geometry g;
    const double dx = s.x - radar.x, dy = s.y - radar.y;
    g.range = std::hypot(dx, dy);
    g.angle = deg2rad(wrap_deg(bearing_deg(dx, dy) - radar.boresight_deg));
    g.psi_deg = std::abs(wrap_deg(bearing_deg(-dx, -dy) - s.facing_deg));
    g.gain = sc.gains.at(g.psi_deg);
    return g;
}

// Radar 2 at the origin looking along +y, radars 1 and 3 half a meter to
// either side aimed at the subject, radar 4 beside the subject on its
// front-right diagonal. The subject faces radar 2 rotated by the condition's
// seating direction.
inline ScenarioConfig preset_scenario(const std::string &id, std::uint64_t seed, double snr_db = 20.0, double duration = 60.0)
{
    struct Row { const char *id; double dist, orient; };
    static constexpr Row rows[] = {{"C1", 1.5, 0.0}, {"C2", 1.5, 90.0}, {"C3", 1.5, 180.0},
                                   {"C4", 3.0, 0.0}, {"C5", 3.0, 90.0}, {"C6", 3.0, 180.0}};
    const Row *row = nullptr;
    for (const auto &r : rows)
        if (id == r.id)
            row = &r;
    if (row == nullptr)
        throw InvalidScenario("unknown preset '" + id + "' (expected C1..C6)");

    ScenarioConfig sc;
    sc.name = id;
    sc.seed = seed;
    sc.duration = duration;
    Subject s;
    s.x = 0.0;
    s.y = row->dist;
    s.facing_deg = wrap_deg(180.0 + row->orient);
    sc.subjects.push_back(s);

    const double side = 0.5;
    const double diag = deg2rad(135.0);
    const double r4x = s.x + 1.5 * std::sin(diag), r4y = s.y + 1.5 * std::cos(diag);
    const double pos[4][2] = {{-side, 0.0}, {0.0, 0.0}, {side, 0.0}, {r4x, r4y}};
    for (int i = 0; i < 4; ++i)
    {
        RadarPlacement p;
        p.id = i + 1;
        p.x = pos[i][0];
        p.y = pos[i][1];
        p.boresight_deg = bearing_deg(s.x - p.x, s.y - p.y);
        p.snr_db = snr_db;
        sc.radars.push_back(p);
    }
    return sc;
}

// Breathing of every subject, keyed only by the scene seed so that all
// radars observe the same motion.
inline std::vector<BreathingTruth> scenario_breathing(const ScenarioConfig &sc, double sample_rate)
{
    std::vector<BreathingTruth> out;
    for (std::size_t i = 0; i < sc.subjects.size(); ++i)
        out.push_back(generate_breathing(sc.subjects[i].breathing, sc.duration, sample_rate, detail::derive_seed(sc.seed, 1000 + i)));
    return out;
}

// Radial displacement seen by a radar: inhalation moves the illuminated
// surface toward the radar, so the range shrinks by gain * chest displacement.
inline RealSeries projected_displacement(const ScenarioConfig &sc, std::size_t radar_index, std::size_t subject_index,
                                         const BreathingTruth &truth)
{
    const auto g = subject_geometry(sc, sc.radars.at(radar_index), sc.subjects.at(subject_index));
    std::vector<double> d(truth.displacement.size());
    for (std::size_t i = 0; i < d.size(); ++i)
        d[i] = -g.gain * truth.displacement[i];
    return truth.displacement.with_samples(std::move(d));
}

// Noise variance per complex fast-time sample that puts the first subject's
// echo at the configured SNR after windowed range compression:
// A^2 (sum w)^2 / (sigma^2 sum w^2).
inline double noise_variance(const RadarConfig &cfg, double amplitude, double snr_db)
{
    if (std::isinf(snr_db) && snr_db > 0.0)
        return 0.0;
    const auto w = cfg.range_window.make(cfg.fast_samples);
    double s1 = 0.0, s2 = 0.0;
    for (double v : w)
    {
        s1 += v;
        s2 += v * v;
    }
    return amplitude * amplitude * s1 * s1 / (s2 * std::pow(10.0, snr_db / 10.0));
}

inline RadarCube synthesize_cube(const ScenarioConfig &sc, std::size_t radar_index)
{
    sc.validate();
    detail::require(radar_index < sc.radars.size(), "synthesize_cube: radar index out of range");
    const auto &radar = sc.radars[radar_index];
    const auto &cfg = radar.config;
    const double lambda = cfg.wavelength();
    const std::size_t n_el = cfg.elements(), n_fast = cfg.fast_samples;
    const auto frames = static_cast<std::size_t>(std::llround(sc.duration * cfg.slow_time_rate));
    if (frames < 2)
        throw InvalidScenario("scenario shorter than two frames");

    struct Echo
    {
        double amplitude;
        double range0;
        double gain;
        std::vector<cplx> element_phase;
        const BreathingTruth *truth;
    };
    const auto truths = scenario_breathing(sc, cfg.slow_time_rate);
    const double grid_lo = cfg.range_grid.front(), grid_hi = cfg.range_grid.back();
    const double ang_lo = cfg.angle_grid.front(), ang_hi = cfg.angle_grid.back();
    auto element_phases = [&](double angle) {
        std::vector<cplx> p(n_el);
        for (std::size_t m = 0; m < n_el; ++m)
            p[m] = std::polar(1.0, 2.0 * std::numbers::pi * cfg.element_positions[m] * std::sin(angle) / lambda);
        return p;
    };

    std::vector<Echo> echoes;
    for (std::size_t i = 0; i < sc.subjects.size(); ++i)
    {
        const auto g = subject_geometry(sc, radar, sc.subjects[i]);
        if (g.range < grid_lo || g.range > grid_hi || g.angle < ang_lo || g.angle > ang_hi)
            throw InvalidScenario("subject " + std::to_string(i) + " lies outside the field of view of radar " +
                                  std::to_string(radar.id));
        echoes.push_back({sc.subjects[i].reflectivity / (g.range * g.range), g.range, g.gain, element_phases(g.angle), &truths[i]});
    }
    for (const auto &r : sc.reflectors)
    {
        const double dx = r.x - radar.x, dy = r.y - radar.y;
        const double range = std::hypot(dx, dy);
        const double angle = deg2rad(wrap_deg(bearing_deg(dx, dy) - radar.boresight_deg));
        if (range <= 0.0 || range >= cfg.unambiguous_range() || std::abs(angle) >= std::numbers::pi / 2)
            continue;
        echoes.push_back({r.reflectivity / (range * range), range, 0.0, element_phases(angle), nullptr});
    }

    RadarCube cube(n_el, n_fast, frames, cfg.fast_time_rate());
    const double chirp_slope = cfg.bandwidth / cfg.sweep_time;
    const double start_freq = cfg.center_freq - 0.5 * cfg.bandwidth;
    const double dtau = cfg.sweep_time / static_cast<double>(n_fast);
    std::vector<cplx> frame(n_el * n_fast);
    for (std::size_t t = 0; t < frames; ++t)
    {
        std::fill(frame.begin(), frame.end(), cplx(0.0));
        for (const auto &e : echoes)
        {
            const double r = e.truth ? e.range0 - e.gain * e.truth->displacement[t] : e.range0;
            const double fb = 2.0 * chirp_slope * r / speed_of_light;
            // The sweep is centered on center_freq, so it starts B/2 below it.
            const cplx carrier = std::polar(e.amplitude, 4.0 * std::numbers::pi * r * start_freq / speed_of_light);
            for (std::size_t f = 0; f < n_fast; ++f)
            {
                const cplx beat = carrier * std::polar(1.0, 2.0 * std::numbers::pi * fb * dtau * static_cast<double>(f));
                for (std::size_t m = 0; m < n_el; ++m)
                    frame[m * n_fast + f] += beat * e.element_phase[m];
            }
        }
        for (std::size_t m = 0; m < n_el; ++m)
            for (std::size_t f = 0; f < n_fast; ++f)
            {
                const cplx v = frame[m * n_fast + f];
                cube.at(m, f, t) = {static_cast<float>(v.real()), static_cast<float>(v.imag())};
            }
    }

    const double var = noise_variance(cfg, echoes.front().amplitude, radar.snr_db);
    if (var > 0.0)
    {
        std::mt19937_64 rng(detail::derive_seed(sc.seed, 0x72616461ULL + static_cast<std::uint64_t>(radar.id)));
        std::normal_distribution<double> normal(0.0, std::sqrt(0.5 * var));
        for (auto &v : cube.data())
        {
            const double re = normal(rng);
            const double im = normal(rng);
            v += RadarCube::sample_type(static_cast<float>(re), static_cast<float>(im));
        }
    }
    return cube;
}

// Per-seed subject variability: rate, depth, slow rate/depth wander, a mild
// second harmonic and a random starting phase.
inline void randomize_breathing(ScenarioConfig &sc, std::uint64_t seed)
{
    std::mt19937_64 rng(detail::derive_seed(seed, 0x7375626aULL));
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (auto &s : sc.subjects)
    {
        auto &b = s.breathing;
        b.base_rate = 0.2 + 0.13 * u01(rng);
        b.amplitude = 3e-3 + 3e-3 * u01(rng);
        b.rate_jitter = 0.06;
        b.amplitude_jitter = 0.08;
        b.harmonic_levels = {0.2};
        b.initial_phase = u01(rng);
    }
}

} // namespace radfuse
