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

// File formats: the RCUB radar cube container, displacement / peak CSV files
// and JSON mappings for the configuration types.
//
// RCUB layout (little-endian):
//   0  "RCUB"
//   4  u16 version (1)
//   6  u32 header length L
//   10 L bytes of UTF-8 JSON: {"config", "elements", "fast", "slow", "fast_time_rate", "radar_id"}
//   10+L  float32 I, Q pairs in (element, fast, slow) order

#include "radfuse/dsp.hpp"
#include "radfuse/error.hpp"
#include "radfuse/fusion.hpp"
#include "radfuse/radar.hpp"
#include "radfuse/simulator.hpp"
#include "radfuse/vitals.hpp"
#include "radfuse/vmd.hpp"

#include <json.hpp>

#include <bit>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <initializer_list>
#include <iterator>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace radfuse
{

using json = nlohmann::json;

namespace io
{

inline constexpr char cube_magic[4] = {'R', 'C', 'U', 'B'};
inline constexpr std::uint16_t cube_version = 1;

// ---------------------------------------------------------------------------
// JSON helpers
// ---------------------------------------------------------------------------

namespace detail
{

inline void check_keys(const json &j, std::initializer_list<const char *> allowed, const std::string &what)
{
    if (!j.is_object())
        throw InvalidInput(what + ": expected a JSON object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto &item : j.items())
        if (!ok.count(item.key()))
            throw InvalidInput(what + ": unknown key '" + item.key() + "'");
}

template <class T>
void read_opt(const json &j, const char *key, T &out, const std::string &what)
{
    if (!j.contains(key))
        return;
    try
    {
        out = j.at(key).get<T>();
    }
    catch (const json::exception &e)
    {
        throw InvalidInput(what + ": bad value for '" + key + "': " + e.what());
    }
}

} // namespace detail

inline json to_json(const WindowSpec &w)
{
    json j{{"kind", to_string(w.kind)}};
    if (w.kind == WindowKind::Taylor)
    {
        j["nbar"] = w.nbar;
        j["sidelobe_db"] = w.sidelobe_db;
    }
    return j;
}

inline WindowSpec window_from_json(const json &j)
{
    WindowSpec w;
    if (j.is_string())
    {
        w.kind = window_kind_from_string(j.get<std::string>());
        return w;
    }
    detail::check_keys(j, {"kind", "nbar", "sidelobe_db"}, "window");
    std::string kind = "hann";
    detail::read_opt(j, "kind", kind, "window");
    w.kind = window_kind_from_string(kind);
    detail::read_opt(j, "nbar", w.nbar, "window");
    detail::read_opt(j, "sidelobe_db", w.sidelobe_db, "window");
    return w;
}

inline json to_json(const RadarConfig &c)
{
    return json{{"center_freq", c.center_freq},
                {"bandwidth", c.bandwidth},
                {"sweep_time", c.sweep_time},
                {"fast_samples", c.fast_samples},
                {"element_positions", c.element_positions},
                {"slow_time_rate", c.slow_time_rate},
                {"range_window", to_json(c.range_window)},
                {"antenna_window", to_json(c.antenna_window)},
                {"angle_grid", c.angle_grid},
                {"range_grid", c.range_grid}};
}

// Missing keys keep the defaults. Grids can be given explicitly (radians,
// meters) or as "angle_span_deg": [from, to, step] and "range_span": [min, max].
inline RadarConfig radar_config_from_json(const json &j, RadarConfig c = default_radar_config())
{
    const std::string what = "radar config";
    detail::check_keys(j, {"center_freq", "bandwidth", "sweep_time", "fast_samples", "element_positions", "slow_time_rate",
                           "range_window", "antenna_window", "angle_grid", "range_grid", "angle_span_deg", "range_span"},
                       what);
    detail::read_opt(j, "center_freq", c.center_freq, what);
    detail::read_opt(j, "bandwidth", c.bandwidth, what);
    detail::read_opt(j, "sweep_time", c.sweep_time, what);
    detail::read_opt(j, "fast_samples", c.fast_samples, what);
    detail::read_opt(j, "element_positions", c.element_positions, what);
    detail::read_opt(j, "slow_time_rate", c.slow_time_rate, what);
    if (j.contains("range_window"))
        c.range_window = window_from_json(j.at("range_window"));
    if (j.contains("antenna_window"))
        c.antenna_window = window_from_json(j.at("antenna_window"));
    detail::read_opt(j, "angle_grid", c.angle_grid, what);
    detail::read_opt(j, "range_grid", c.range_grid, what);
    if (j.contains("angle_span_deg"))
    {
        std::vector<double> span;
        detail::read_opt(j, "angle_span_deg", span, what);
        radfuse::detail::require(span.size() == 3 && span[2] > 0.0, "angle_span_deg must be [from, to, step>0]");
        c.angle_grid = angle_grid_degrees(span[0], span[1], span[2]);
    }
    if (j.contains("range_span"))
    {
        std::vector<double> span;
        detail::read_opt(j, "range_span", span, what);
        radfuse::detail::require(span.size() == 2, "range_span must be [min, max]");
        c.range_grid = range_bins_between(c, span[0], span[1]);
    }
    c.validate();
    return c;
}

inline json to_json(const VmdConfig &c)
{
    json j{{"modes", c.modes},       {"alpha", c.alpha}, {"eta", c.eta},   {"tol", c.tol},
           {"max_iter", c.max_iter}, {"mirror", c.mirror}};
    j["init"] = c.init == InitPolicy::Uniform ? "uniform" : c.init == InitPolicy::SpectralPeaks ? "spectral-peaks" : "explicit";
    if (c.init == InitPolicy::Explicit)
        j["init_freqs_hz"] = c.init_freqs_hz;
    j["pooling"] = c.pooling == FrequencyPooling::AllChannels ? "all" : "single";
    if (c.pooling == FrequencyPooling::SingleChannel)
        j["pooling_channel"] = c.pooling_channel;
    return j;
}

inline VmdConfig vmd_config_from_json(const json &j, VmdConfig c = {})
{
    const std::string what = "vmd config";
    detail::check_keys(j, {"modes", "alpha", "eta", "tol", "max_iter", "mirror", "init", "init_freqs_hz", "pooling", "pooling_channel"},
                       what);
    detail::read_opt(j, "modes", c.modes, what);
    detail::read_opt(j, "alpha", c.alpha, what);
    detail::read_opt(j, "eta", c.eta, what);
    detail::read_opt(j, "tol", c.tol, what);
    detail::read_opt(j, "max_iter", c.max_iter, what);
    detail::read_opt(j, "mirror", c.mirror, what);
    detail::read_opt(j, "init_freqs_hz", c.init_freqs_hz, what);
    detail::read_opt(j, "pooling_channel", c.pooling_channel, what);
    if (j.contains("init"))
    {
        std::string s;
        detail::read_opt(j, "init", s, what);
        if (s == "uniform")
            c.init = InitPolicy::Uniform;
        else if (s == "spectral-peaks")
            c.init = InitPolicy::SpectralPeaks;
        else if (s == "explicit")
            c.init = InitPolicy::Explicit;
        else
            throw InvalidInput("vmd config: init must be uniform, spectral-peaks or explicit");
    }
    if (j.contains("pooling"))
    {
        std::string s;
        detail::read_opt(j, "pooling", s, what);
        radfuse::detail::require(s == "all" || s == "single", "vmd config: pooling must be all or single");
        c.pooling = s == "all" ? FrequencyPooling::AllChannels : FrequencyPooling::SingleChannel;
    }
    c.validate();
    return c;
}

inline json to_json(const FusionConfig &c)
{
    return json{{"f_rr", c.f_rr}, {"max_align_lag", c.max_align_lag}, {"respiratory_band", {c.band_lo, c.band_hi}}};
}

inline FusionConfig fusion_config_from_json(const json &j, FusionConfig c = {})
{
    const std::string what = "fusion config";
    detail::check_keys(j, {"f_rr", "max_align_lag", "respiratory_band"}, what);
    detail::read_opt(j, "f_rr", c.f_rr, what);
    detail::read_opt(j, "max_align_lag", c.max_align_lag, what);
    if (j.contains("respiratory_band"))
    {
        std::vector<double> band;
        detail::read_opt(j, "respiratory_band", band, what);
        radfuse::detail::require(band.size() == 2, "fusion config: respiratory_band must be [lo, hi]");
        c.band_lo = band[0];
        c.band_hi = band[1];
    }
    c.validate();
    return c;
}

inline json to_json(const PeakConfig &c) { return json{{"min_separation", c.min_separation}, {"min_prominence", c.min_prominence}}; }

inline PeakConfig peak_config_from_json(const json &j, PeakConfig c = {})
{
    const std::string what = "peak config";
    detail::check_keys(j, {"min_separation", "min_prominence"}, what);
    detail::read_opt(j, "min_separation", c.min_separation, what);
    detail::read_opt(j, "min_prominence", c.min_prominence, what);
    c.validate();
    return c;
}

inline json to_json(const MetricReport &m)
{
    return json{{"rmse_rri_s", m.rmse_rri}, {"mae_rr_bpm", m.mae_rr}, {"accuracy", m.accuracy},
                {"theta_rr_bpm", m.theta_rr}, {"matched_intervals", m.matched_count}};
}

inline json to_json(const BreathingModel &b)
{
    return json{{"base_rate", b.base_rate},
                {"amplitude", b.amplitude},
                {"harmonic_levels", b.harmonic_levels},
                {"rate_jitter", b.rate_jitter},
                {"amplitude_jitter", b.amplitude_jitter},
                {"jitter_time_constant", b.jitter_time_constant},
                {"initial_phase", b.initial_phase}};
}

inline BreathingModel breathing_from_json(const json &j, BreathingModel b = {})
{
    const std::string what = "breathing";
    detail::check_keys(j, {"base_rate", "amplitude", "harmonic_levels", "rate_jitter", "amplitude_jitter", "jitter_time_constant",
                           "initial_phase"},
                       what);
    detail::read_opt(j, "base_rate", b.base_rate, what);
    detail::read_opt(j, "amplitude", b.amplitude, what);
    detail::read_opt(j, "harmonic_levels", b.harmonic_levels, what);
    detail::read_opt(j, "rate_jitter", b.rate_jitter, what);
    detail::read_opt(j, "amplitude_jitter", b.amplitude_jitter, what);
    detail::read_opt(j, "jitter_time_constant", b.jitter_time_constant, what);
    detail::read_opt(j, "initial_phase", b.initial_phase, what);
    b.validate();
    return b;
}

// +inf SNR (noise disabled) is written as null.
inline json snr_to_json(double snr_db) { return std::isinf(snr_db) ? json(nullptr) : json(snr_db); }

inline json to_json(const ScenarioConfig &sc)
{
    json radars = json::array(), subjects = json::array(), reflectors = json::array();
    for (const auto &r : sc.radars)
        radars.push_back({{"id", r.id},
                          {"position", {r.x, r.y}},
                          {"boresight_deg", r.boresight_deg},
                          {"snr_db", snr_to_json(r.snr_db)},
                          {"config", to_json(r.config)}});
    for (const auto &s : sc.subjects)
        subjects.push_back({{"position", {s.x, s.y}},
                            {"facing_deg", s.facing_deg},
                            {"reflectivity", s.reflectivity},
                            {"breathing", to_json(s.breathing)}});
    for (const auto &r : sc.reflectors)
        reflectors.push_back({{"position", {r.x, r.y}}, {"reflectivity", r.reflectivity}});
    return json{{"name", sc.name},
                {"seed", sc.seed},
                {"duration", sc.duration},
                {"orientation_gains", {{"front", sc.gains.front}, {"side", sc.gains.side}, {"back", sc.gains.back}}},
                {"radars", radars},
                {"subjects", subjects},
                {"reflectors", reflectors}};
}

namespace detail
{

inline void read_position(const json &j, double &x, double &y, const std::string &what)
{
    if (!j.contains("position"))
        return;
    std::vector<double> p;
    read_opt(j, "position", p, what);
    radfuse::detail::require(p.size() == 2, what + ": position must be [x, y]");
    x = p[0];
    y = p[1];
}

} // namespace detail

// A scenario is either {"preset": "C1", ...overrides} or a full description.
// Overrides accepted on presets: seed, duration, snr_db (all radars).
inline ScenarioConfig scenario_from_json(const json &j, std::uint64_t seed)
{
    const std::string what = "scenario";
    detail::check_keys(j, {"preset", "name", "seed", "duration", "snr_db", "orientation_gains", "radars", "subjects", "reflectors",
                           "randomize_breathing"},
                       what);
    ScenarioConfig sc;
    if (j.contains("preset"))
    {
        std::string preset;
        double duration = 60.0, snr = 20.0;
        detail::read_opt(j, "preset", preset, what);
        detail::read_opt(j, "duration", duration, what);
        if (j.contains("snr_db"))
            snr = j.at("snr_db").is_null() ? std::numeric_limits<double>::infinity() : j.at("snr_db").get<double>();
        sc = preset_scenario(preset, seed, snr, duration);
    }
    else
    {
        detail::read_opt(j, "name", sc.name, what);
        detail::read_opt(j, "duration", sc.duration, what);
        if (j.contains("radars"))
            for (const auto &rj : j.at("radars"))
            {
                detail::check_keys(rj, {"id", "position", "boresight_deg", "snr_db", "config"}, "radar");
                RadarPlacement r;
                detail::read_opt(rj, "id", r.id, "radar");
                detail::read_position(rj, r.x, r.y, "radar");
                detail::read_opt(rj, "boresight_deg", r.boresight_deg, "radar");
                if (rj.contains("snr_db"))
                    r.snr_db = rj.at("snr_db").is_null() ? std::numeric_limits<double>::infinity() : rj.at("snr_db").get<double>();
                if (rj.contains("config"))
                    r.config = radar_config_from_json(rj.at("config"));
                sc.radars.push_back(r);
            }
        if (j.contains("subjects"))
            for (const auto &sj : j.at("subjects"))
            {
                detail::check_keys(sj, {"position", "facing_deg", "reflectivity", "breathing"}, "subject");
                Subject s;
                detail::read_position(sj, s.x, s.y, "subject");
                detail::read_opt(sj, "facing_deg", s.facing_deg, "subject");
                detail::read_opt(sj, "reflectivity", s.reflectivity, "subject");
                if (sj.contains("breathing"))
                    s.breathing = breathing_from_json(sj.at("breathing"));
                sc.subjects.push_back(s);
            }
        if (j.contains("reflectors"))
            for (const auto &rj : j.at("reflectors"))
            {
                detail::check_keys(rj, {"position", "reflectivity"}, "reflector");
                StaticReflector r;
                detail::read_position(rj, r.x, r.y, "reflector");
                detail::read_opt(rj, "reflectivity", r.reflectivity, "reflector");
                sc.reflectors.push_back(r);
            }
        if (j.contains("snr_db"))
            for (auto &r : sc.radars)
                r.snr_db = j.at("snr_db").is_null() ? std::numeric_limits<double>::infinity() : j.at("snr_db").get<double>();
    }
    if (j.contains("orientation_gains"))
    {
        const auto &g = j.at("orientation_gains");
        detail::check_keys(g, {"front", "side", "back"}, "orientation_gains");
        detail::read_opt(g, "front", sc.gains.front, "orientation_gains");
        detail::read_opt(g, "side", sc.gains.side, "orientation_gains");
        detail::read_opt(g, "back", sc.gains.back, "orientation_gains");
    }
    sc.seed = seed;
    bool randomize = false;
    detail::read_opt(j, "randomize_breathing", randomize, what);
    if (randomize)
        randomize_breathing(sc, seed);
    sc.validate();
    return sc;
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

inline std::string read_file(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path + "' for reading: " + std::strerror(errno));
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad())
        throw IoError("read failed on '" + path + "'");
    return data;
}

inline void write_file(const std::string &path, const std::string &data)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open '" + path + "' for writing: " + std::strerror(errno));
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.close();
    if (!out)
        throw IoError("write failed on '" + path + "'");
}

inline json parse_json(const std::string &text, const std::string &origin)
{
    try
    {
        return json::parse(text);
    }
    catch (const json::parse_error &e)
    {
        throw ParseError(origin + ": " + e.what(), e.byte > 0 ? e.byte - 1 : 0);
    }
}

inline json read_json_file(const std::string &path) { return parse_json(read_file(path), path); }

namespace detail
{

inline void put_u16(std::string &s, std::uint16_t v)
{
    s.push_back(static_cast<char>(v & 0xff));
    s.push_back(static_cast<char>(v >> 8));
}

inline void put_u32(std::string &s, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i)
        s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint32_t get_u32(const std::string &s, std::size_t at)
{
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(s[at + i])) << (8 * i);
    return v;
}

} // namespace detail

struct CubeFile
{
    RadarCube cube;
    RadarConfig config;
    int radar_id = 0;
};

inline std::string encode_cube(const RadarCube &cube, const RadarConfig &cfg, int radar_id)
{
    const json header{{"config", to_json(cfg)},
                      {"elements", cube.elements()},
                      {"fast", cube.fast()},
                      {"slow", cube.frames()},
                      {"fast_time_rate", cube.fast_time_rate()},
                      {"radar_id", radar_id}};
    const std::string text = header.dump();
    std::string out(cube_magic, 4);
    detail::put_u16(out, cube_version);
    detail::put_u32(out, static_cast<std::uint32_t>(text.size()));
    out += text;
    out.reserve(out.size() + cube.data().size() * 8);
    for (const auto &v : cube.data())
    {
        detail::put_u32(out, std::bit_cast<std::uint32_t>(v.real()));
        detail::put_u32(out, std::bit_cast<std::uint32_t>(v.imag()));
    }
    return out;
}

inline CubeFile decode_cube(const std::string &bytes, const std::string &origin = "cube")
{
    if (bytes.size() < 10)
        throw ParseError(origin + ": truncated RCUB preamble", bytes.size());
    if (bytes.compare(0, 4, cube_magic, 4) != 0)
        throw ParseError(origin + ": bad magic (expected RCUB)", 0);
    const auto version = static_cast<std::uint16_t>(static_cast<unsigned char>(bytes[4]) | (static_cast<unsigned char>(bytes[5]) << 8));
    if (version != cube_version)
        throw ParseError(origin + ": unsupported version " + std::to_string(version), 4);
    const std::uint32_t hlen = detail::get_u32(bytes, 6);
    if (bytes.size() - 10 < hlen)
        throw ParseError(origin + ": header length exceeds file size", 6);

    json header;
    try
    {
        header = json::parse(bytes.begin() + 10, bytes.begin() + 10 + hlen);
    }
    catch (const json::parse_error &e)
    {
        throw ParseError(origin + ": header is not valid JSON: " + e.what(), 10 + (e.byte > 0 ? e.byte - 1 : 0));
    }

    std::size_t elements = 0, fast = 0, slow = 0;
    double rate = 0.0;
    int id = 0;
    RadarConfig cfg;
    try
    {
        elements = header.at("elements").get<std::size_t>();
        fast = header.at("fast").get<std::size_t>();
        slow = header.at("slow").get<std::size_t>();
        rate = header.at("fast_time_rate").get<double>();
        id = header.value("radar_id", 0);
        cfg = radar_config_from_json(header.at("config"));
    }
    catch (const json::exception &e)
    {
        throw ParseError(origin + ": bad header field: " + e.what(), 10);
    }
    catch (const InvalidInput &e)
    {
        throw ParseError(origin + ": bad header config: " + e.what(), 10);
    }

    const std::size_t payload = 10 + hlen;
    const std::size_t count = elements * fast * slow;
    if (elements == 0 || fast == 0 || slow == 0 || count / elements / fast != slow ||
        (bytes.size() - payload) / 8 != count || (bytes.size() - payload) % 8 != 0)
        throw ParseError(origin + ": payload size does not match header dimensions", payload);
    if (elements != cfg.elements() || fast != cfg.fast_samples)
        throw ParseError(origin + ": header dimensions disagree with the embedded config", 10);

    CubeFile out{RadarCube(elements, fast, slow, rate), cfg, id};
    auto &data = out.cube.data();
    for (std::size_t i = 0; i < count; ++i)
    {
        const std::size_t at = payload + 8 * i;
        const float re = std::bit_cast<float>(detail::get_u32(bytes, at));
        const float im = std::bit_cast<float>(detail::get_u32(bytes, at + 4));
        if (!std::isfinite(re) || !std::isfinite(im))
            throw ParseError(origin + ": non-finite sample", at);
        data[i] = {re, im};
    }
    return out;
}

inline void write_cube(const std::string &path, const RadarCube &cube, const RadarConfig &cfg, int radar_id)
{
    write_file(path, encode_cube(cube, cfg, radar_id));
}

inline CubeFile read_cube(const std::string &path) { return decode_cube(read_file(path), path); }

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

struct CsvTable
{
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;
};

inline std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string encode_csv(const CsvTable &t)
{
    std::string out;
    for (std::size_t c = 0; c < t.header.size(); ++c)
        out += (c ? "," : "") + t.header[c];
    out += '\n';
    const std::size_t rows = t.columns.empty() ? 0 : t.columns[0].size();
    for (std::size_t r = 0; r < rows; ++r)
    {
        for (std::size_t c = 0; c < t.columns.size(); ++c)
        {
            if (c)
                out += ',';
            out += format_double(t.columns[c][r]);
        }
        out += '\n';
    }
    return out;
}

inline CsvTable decode_csv(const std::string &text, const std::string &origin = "csv")
{
    CsvTable t;
    std::size_t pos = 0, line_no = 0;
    while (pos < text.size())
    {
        const std::size_t line_start = pos;
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos)
            end = text.size();
        std::string line = text.substr(pos, end - pos);
        pos = end + 1;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;

        std::vector<std::string> fields;
        std::vector<std::size_t> offsets;
        std::size_t f0 = 0;
        while (true)
        {
            const std::size_t comma = line.find(',', f0);
            fields.push_back(line.substr(f0, comma == std::string::npos ? std::string::npos : comma - f0));
            offsets.push_back(line_start + f0);
            if (comma == std::string::npos)
                break;
            f0 = comma + 1;
        }
        if (line_no++ == 0)
        {
            t.header = fields;
            t.columns.resize(fields.size());
            continue;
        }
        if (fields.size() != t.header.size())
            throw ParseError(origin + ": row " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                                 " fields, expected " + std::to_string(t.header.size()),
                             line_start);
        for (std::size_t c = 0; c < fields.size(); ++c)
        {
            const char *s = fields[c].c_str();
            char *stop = nullptr;
            errno = 0;
            const double v = std::strtod(s, &stop);
            if (fields[c].empty() || stop != s + fields[c].size() || !std::isfinite(v))
                throw ParseError(origin + ": '" + fields[c] + "' is not a finite number", offsets[c]);
            t.columns[c].push_back(v);
        }
    }
    if (t.header.empty())
        throw ParseError(origin + ": empty CSV", 0);
    return t;
}

inline CsvTable read_csv(const std::string &path) { return decode_csv(read_file(path), path); }

inline void write_csv(const std::string &path, const CsvTable &t) { write_file(path, encode_csv(t)); }

// time_s column followed by one column per channel named radar_<id>.
inline CsvTable displacement_table(const MultiChannelSeries &x)
{
    CsvTable t;
    t.header.push_back("time_s");
    std::vector<double> time(x.length());
    for (std::size_t i = 0; i < time.size(); ++i)
        time[i] = x[0].time_at(i);
    t.columns.push_back(std::move(time));
    for (std::size_t c = 0; c < x.channel_count(); ++c)
    {
        t.header.push_back("radar_" + x.ids()[c]);
        t.columns.push_back(x[c].values());
    }
    return t;
}

// Inverse of displacement_table. The sample rate comes from the time column,
// which must be uniform.
inline MultiChannelSeries displacement_from_table(const CsvTable &t, const std::string &origin = "csv")
{
    if (t.header.size() < 2 || t.header[0] != "time_s")
        throw ParseError(origin + ": expected header time_s,<channel>...", 0);
    const auto &time = t.columns[0];
    if (time.size() < 2)
        throw ParseError(origin + ": need at least two rows", 0);
    const double dt = (time.back() - time.front()) / static_cast<double>(time.size() - 1);
    if (!(dt > 0.0))
        throw ParseError(origin + ": time column must increase", 0);
    for (std::size_t i = 1; i < time.size(); ++i)
        if (std::abs(time[i] - time[i - 1] - dt) > 1e-6 * dt)
            throw ParseError(origin + ": time column is not uniformly sampled (row " + std::to_string(i + 1) + ")", 0);
    std::vector<RealSeries> channels;
    std::vector<std::string> ids;
    for (std::size_t c = 1; c < t.header.size(); ++c)
    {
        channels.emplace_back(t.columns[c], 1.0 / dt, time.front());
        const std::string &h = t.header[c];
        ids.push_back(h.rfind("radar_", 0) == 0 ? h.substr(6) : h);
    }
    return MultiChannelSeries(std::move(channels), std::move(ids));
}

inline CsvTable peak_table(std::span<const double> peaks)
{
    return CsvTable{{"peak_time_s"}, {std::vector<double>(peaks.begin(), peaks.end())}};
}

} // namespace io
} // namespace radfuse
