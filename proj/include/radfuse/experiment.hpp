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

// Closed-loop experiments: synthesize scenes, run single-radar and fused
// chains, and score breath intervals against the generator's peak times.

#include "radfuse/error.hpp"
#include "radfuse/fusion.hpp"
#include "radfuse/radar.hpp"
#include "radfuse/simulator.hpp"
#include "radfuse/vitals.hpp"
#include "radfuse/vmd.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace radfuse
{

// "single:<id>" runs one radar through VMD; "fused:<id>+<id>..." runs MVMD
// fusion over the listed radars.
struct MethodSpec
{
    std::string label;
    std::vector<int> radar_ids;
    bool fused = false;
};

inline MethodSpec parse_method(const std::string &text)
{
    const auto colon = text.find(':');
    detail::require(colon != std::string::npos, "method '" + text + "' must look like single:<id> or fused:<id>+<id>");
    const std::string kind = text.substr(0, colon), rest = text.substr(colon + 1);
    MethodSpec m{text, {}, kind == "fused"};
    detail::require(kind == "single" || kind == "fused", "unknown method kind '" + kind + "'");
    std::size_t pos = 0;
    while (pos <= rest.size())
    {
        const auto plus = rest.find('+', pos);
        const std::string tok = rest.substr(pos, plus == std::string::npos ? std::string::npos : plus - pos);
        std::size_t used = 0;
        int id = 0;
        try
        {
            id = std::stoi(tok, &used);
        }
        catch (const std::exception &)
        {
            used = 0;
        }
        detail::require(!tok.empty() && used == tok.size(), "bad radar id '" + tok + "' in method '" + text + "'");
        m.radar_ids.push_back(id);
        if (plus == std::string::npos)
            break;
        pos = plus + 1;
    }
    detail::require(m.fused || m.radar_ids.size() == 1, "single-radar method takes exactly one id");
    return m;
}

struct PipelineSettings
{
    VmdConfig vmd;
    FusionConfig fusion;
    PeakConfig peaks;
    double theta_rr = 2.0;
};

struct MethodOutcome
{
    std::string method;
    bool ok = false;
    std::string failure;
    MetricReport metrics;
    MatchResult match;
    std::vector<double> peak_times;
};

struct SeedOutcome
{
    std::uint64_t seed = 0;
    std::vector<MethodOutcome> methods;
};

struct MethodSummary
{
    std::string method;
    std::size_t runs = 0, failures = 0;
    double rmse_rri = 0.0, mae_rr = 0.0, accuracy = 0.0; // means over successful runs
};

struct ExperimentResult
{
    std::string scenario;
    std::vector<SeedOutcome> seeds;
    std::vector<MethodSummary> summary;
};

struct RadarRun
{
    int radar_id;
    RadarTrack track;
};

// Processes the radars of the scene whose ids are listed (all when empty).
inline std::vector<RadarRun> process_scene(const ScenarioConfig &sc, const std::vector<int> &only = {})
{
    std::vector<RadarRun> runs;
    for (std::size_t i = 0; i < sc.radars.size(); ++i)
        if (only.empty() || std::find(only.begin(), only.end(), sc.radars[i].id) != only.end())
            runs.push_back({sc.radars[i].id, process_cube(synthesize_cube(sc, i), sc.radars[i].config)});
    return runs;
}

// Breaths in the fused or single-radar waveform. The displacement follows
// range, so inhalation is a minimum and the waveform is negated first.
inline std::vector<double> breath_times(const RealSeries &upsilon, const PeakConfig &peaks)
{
    std::vector<double> neg(upsilon.size());
    for (std::size_t i = 0; i < neg.size(); ++i)
        neg[i] = -upsilon[i];
    return detect_peaks(upsilon.with_samples(std::move(neg)), peaks);
}

inline MethodOutcome run_method(const MethodSpec &method, const std::vector<RadarRun> &runs,
                                 const RespiratoryEstimate &reference, const PipelineSettings &settings)
{
    MethodOutcome out;
    out.method = method.label;
    try
    {
        std::vector<RealSeries> channels;
        std::vector<std::string> ids;
        for (int id : method.radar_ids)
        {
            const RadarRun *hit = nullptr;
            for (const auto &r : runs)
                if (r.radar_id == id)
                    hit = &r;
            detail::require(hit != nullptr, "method " + method.label + " references unknown radar " + std::to_string(id));
            channels.push_back(hit->track.displacement);
            ids.push_back(std::to_string(id));
        }
        const auto fused = fuse(MultiChannelSeries(std::move(channels), std::move(ids)), settings.vmd, settings.fusion);
        out.peak_times = breath_times(fused.upsilon, settings.peaks);
        const auto est = intervals_from_peaks(out.peak_times);
        out.match = match_intervals(est, reference);
        out.metrics = compute_metrics(out.match.pairs, settings.theta_rr);
        out.ok = true;
    }
    catch (const InvalidInput &)
    {
        throw;
    }
    catch (const Error &e)
    {
        out.failure = e.what();
    }
    return out;
}

inline ExperimentResult run_experiment(const std::function<ScenarioConfig(std::uint64_t)> &make_scene,
                                       const std::vector<std::string> &methods, const std::vector<std::uint64_t> &seeds,
                                       const PipelineSettings &settings = {})
{
    std::vector<MethodSpec> specs;
    for (const auto &m : methods)
        specs.push_back(parse_method(m));
    detail::require(!specs.empty() && !seeds.empty(), "run_experiment: need at least one method and one seed");

    std::vector<int> needed;
    for (const auto &spec : specs)
        for (int id : spec.radar_ids)
            if (std::find(needed.begin(), needed.end(), id) == needed.end())
                needed.push_back(id);

    ExperimentResult result;
    for (auto seed : seeds)
    {
        const auto sc = make_scene(seed);
        result.scenario = sc.name;
        const auto runs = process_scene(sc, needed);
        const auto truth = generate_breathing(sc.subjects.front().breathing, sc.duration, sc.radars.front().config.slow_time_rate,
                                              detail::derive_seed(sc.seed, 1000));
        const auto reference = intervals_from_peaks(truth.peak_times);
        SeedOutcome so{seed, {}};
        for (const auto &spec : specs)
            so.methods.push_back(run_method(spec, runs, reference, settings));
        result.seeds.push_back(std::move(so));
    }

    for (std::size_t k = 0; k < specs.size(); ++k)
    {
        MethodSummary s{specs[k].label};
        for (const auto &so : result.seeds)
        {
            const auto &mo = so.methods[k];
            ++s.runs;
            if (!mo.ok)
            {
                ++s.failures;
                continue;
            }
            s.rmse_rri += mo.metrics.rmse_rri;
            s.mae_rr += mo.metrics.mae_rr;
            s.accuracy += mo.metrics.accuracy;
        }
        const std::size_t good = s.runs - s.failures;
        if (good > 0)
        {
            s.rmse_rri /= static_cast<double>(good);
            s.mae_rr /= static_cast<double>(good);
            s.accuracy /= static_cast<double>(good);
        }
        else
            s.rmse_rri = s.mae_rr = s.accuracy = std::numeric_limits<double>::quiet_NaN();
        result.summary.push_back(s);
    }
    return result;
}

// Preset scene with per-seed breathing variability.
inline std::function<ScenarioConfig(std::uint64_t)> preset_factory(const std::string &preset, double snr_db, double duration)
{
    return [=](std::uint64_t seed) {
        auto sc = preset_scenario(preset, seed, snr_db, duration);
        randomize_breathing(sc, seed);
        return sc;
    };
}

} // namespace radfuse
