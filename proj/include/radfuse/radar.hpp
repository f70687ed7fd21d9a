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

// FMCW processing chain: range compression, beamforming, clutter removal,
// power map, strongest-cell selection and phase-based displacement.

#include "radfuse/dsp.hpp"
#include "radfuse/error.hpp"
#include "radfuse/fft.hpp"
#include "radfuse/series.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

namespace radfuse
{

inline constexpr double speed_of_light = 299792458.0;

inline double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

struct RadarConfig
{
    double center_freq = 79e9;
    double bandwidth = 3.354e9;
    double sweep_time = 128e-6;
    std::size_t fast_samples = 128;
    std::vector<double> element_positions; // virtual array, meters, strictly increasing
    double slow_time_rate = 100.0;
    WindowSpec range_window{WindowKind::Hann};
    WindowSpec antenna_window{WindowKind::Taylor, 4, -30.0};
    std::vector<double> angle_grid; // radians, ascending
    std::vector<double> range_grid; // meters, ascending

    double wavelength() const { return speed_of_light / center_freq; }
    double range_resolution() const { return speed_of_light / (2.0 * bandwidth); }
    double fast_time_rate() const { return static_cast<double>(fast_samples) / sweep_time; }
    // Complex sampling: beat frequencies in [0, fs_fast) map to [0, N * dr).
    double unambiguous_range() const { return static_cast<double>(fast_samples) * range_resolution(); }
    std::size_t elements() const { return element_positions.size(); }

    void validate() const
    {
        detail::require(center_freq > 0.0 && std::isfinite(center_freq), "RadarConfig: center frequency must be positive");
        detail::require(bandwidth > 0.0 && std::isfinite(bandwidth), "RadarConfig: bandwidth must be positive");
        detail::require(sweep_time > 0.0 && std::isfinite(sweep_time), "RadarConfig: sweep time must be positive");
        detail::require(fast_samples >= 2, "RadarConfig: at least 2 fast-time samples");
        detail::require(slow_time_rate > 0.0 && std::isfinite(slow_time_rate), "RadarConfig: slow-time rate must be positive");
        detail::require(!element_positions.empty(), "RadarConfig: at least one virtual element");
        for (std::size_t i = 1; i < element_positions.size(); ++i)
            detail::require(element_positions[i] > element_positions[i - 1],
                            "RadarConfig: element positions must be strictly increasing");
        detail::require(!angle_grid.empty() && !range_grid.empty(), "RadarConfig: grids must be non-empty");
        detail::require(std::is_sorted(angle_grid.begin(), angle_grid.end()), "RadarConfig: angle grid must be sorted");
        detail::require(std::is_sorted(range_grid.begin(), range_grid.end()), "RadarConfig: range grid must be sorted");
    }
};

// Range cells at multiples of the range resolution inside [r_min, r_max].
inline std::vector<double> range_bins_between(const RadarConfig &cfg, double r_min, double r_max)
{
    const double dr = cfg.range_resolution();
    std::vector<double> grid;
    for (auto k = static_cast<std::size_t>(std::ceil(r_min / dr)); static_cast<double>(k) * dr <= r_max; ++k)
        if (k < cfg.fast_samples)
            grid.push_back(static_cast<double>(k) * dr);
    return grid;
}

inline std::vector<double> angle_grid_degrees(double from, double to, double step)
{
    std::vector<double> grid;
    const auto count = static_cast<std::size_t>(std::floor((to - from) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i)
        grid.push_back(deg2rad(from + step * static_cast<double>(i)));
    return grid;
}

// 79 GHz, 3.354 GHz sweep, 3 Tx x 4 Rx folded into a contiguous 12-element
// virtual array at the 1.9 mm Rx pitch, 100 Hz frames, -60..60 deg in 1 deg
// steps and range cells from 0.3 m to 5 m.
inline RadarConfig default_radar_config()
{
    RadarConfig cfg;
    constexpr std::size_t elements = 12;
    constexpr double pitch = 1.9e-3;
    for (std::size_t m = 0; m < elements; ++m)
        cfg.element_positions.push_back((static_cast<double>(m) - 0.5 * (elements - 1)) * pitch);
    cfg.angle_grid = angle_grid_degrees(-60.0, 60.0, 1.0);
    cfg.range_grid = range_bins_between(cfg, 0.3, 5.0);
    return cfg;
}

// Raw IQ samples indexed (element, fast time, frame), stored element-major in
// single precision to match the on-disk layout.
class RadarCube
{
public:
    using sample_type = std::complex<float>;

    RadarCube(std::size_t elements, std::size_t fast, std::size_t frames, double fast_time_rate)
        : elements_(elements), fast_(fast), frames_(frames), fast_time_rate_(fast_time_rate),
          iq_(elements * fast * frames)
    {
        detail::require(elements > 0 && fast > 0 && frames > 0, "RadarCube: dimensions must be positive");
        detail::require(fast_time_rate > 0.0 && std::isfinite(fast_time_rate), "RadarCube: fast-time rate must be positive");
    }

    std::size_t elements() const noexcept { return elements_; }
    std::size_t fast() const noexcept { return fast_; }
    std::size_t frames() const noexcept { return frames_; }
    double fast_time_rate() const noexcept { return fast_time_rate_; }

    std::size_t index(std::size_t m, std::size_t f, std::size_t t) const noexcept { return (m * fast_ + f) * frames_ + t; }
    sample_type &at(std::size_t m, std::size_t f, std::size_t t) { return iq_[index(m, f, t)]; }
    const sample_type &at(std::size_t m, std::size_t f, std::size_t t) const { return iq_[index(m, f, t)]; }

    std::vector<sample_type> &data() noexcept { return iq_; }
    const std::vector<sample_type> &data() const noexcept { return iq_; }

private:
    std::size_t elements_, fast_, frames_;
    double fast_time_rate_;
    std::vector<sample_type> iq_;
};

// s'_m(r, t) on the configured range grid, indexed (element, range, frame).
struct RangeProfiles
{
    std::size_t elements = 0, ranges = 0, frames = 0;
    std::vector<cplx> data;

    cplx &at(std::size_t m, std::size_t r, std::size_t t) { return data[(m * ranges + r) * frames + t]; }
    const cplx &at(std::size_t m, std::size_t r, std::size_t t) const { return data[(m * ranges + r) * frames + t]; }
};

// Complex image I(r, theta, t).
struct RadarImage
{
    std::size_t ranges = 0, angles = 0, frames = 0;
    double frame_rate = 1.0;
    std::vector<cplx> voxels;

    std::size_t index(std::size_t r, std::size_t a, std::size_t t) const noexcept { return (r * angles + a) * frames + t; }
    cplx &at(std::size_t r, std::size_t a, std::size_t t) { return voxels[index(r, a, t)]; }
    const cplx &at(std::size_t r, std::size_t a, std::size_t t) const { return voxels[index(r, a, t)]; }
};

struct PowerMap
{
    std::size_t ranges = 0, angles = 0;
    std::vector<double> values; // (r, theta), row-major in r

    double &at(std::size_t r, std::size_t a) { return values[r * angles + a]; }
    double at(std::size_t r, std::size_t a) const { return values[r * angles + a]; }
};

struct PeakCell
{
    std::size_t range_index = 0;
    std::size_t angle_index = 0;
};

namespace detail
{

inline void check_cube(const RadarCube &cube, const RadarConfig &cfg)
{
    cfg.validate();
    require(cube.elements() == cfg.elements(), "radar: cube element count does not match the configuration");
    require(cube.fast() == cfg.fast_samples, "radar: cube fast-time length does not match the configuration");
    require(std::abs(static_cast<double>(cube.fast()) / cube.fast_time_rate() - cfg.sweep_time) <= 1e-9 * cfg.sweep_time,
            "radar: fast-time samples do not span the sweep duration");
    require(cfg.range_grid.front() >= 0.0, "radar: range grid must be non-negative");
    require(cfg.range_grid.back() < cfg.unambiguous_range(), "radar: range grid exceeds the unambiguous range");
}

// Fractional DFT bin of each range cell; integral cells reuse the FFT.
struct RangeBinMap
{
    std::vector<double> position;
    std::vector<long> fft_bin; // -1 when the cell falls between bins
};

inline RangeBinMap map_range_bins(const RadarConfig &cfg)
{
    RangeBinMap map;
    const double dr = cfg.range_resolution();
    for (double r : cfg.range_grid)
    {
        const double kappa = r / dr;
        const double nearest = std::round(kappa);
        map.position.push_back(kappa);
        map.fft_bin.push_back(std::abs(kappa - nearest) <= 1e-9 ? static_cast<long>(nearest) : -1);
    }
    return map;
}

// Steering weights b_m(theta) = w_m conj(a_m(theta)), a_m = exp(j 2 pi x_m sin(theta) / lambda).
inline std::vector<cplx> steering_weights(const RadarConfig &cfg, double theta, const std::vector<double> &taper)
{
    std::vector<cplx> b(cfg.elements());
    for (std::size_t m = 0; m < b.size(); ++m)
        b[m] = taper[m] * std::polar(1.0, -2.0 * std::numbers::pi * cfg.element_positions[m] * std::sin(theta) / cfg.wavelength());
    return b;
}

// Range-compresses frames [t0, t0 + count) of element m for every grid cell:
// out[r * count + j].
inline void compress_block(const RadarCube &cube, const RangeBinMap &bins,
                           const std::vector<double> &window, std::size_t m, std::size_t t0, std::size_t count,
                           std::vector<cplx> &out)
{
    const std::size_t n = cube.fast();
    const double dtau = 1.0 / cube.fast_time_rate();
    std::vector<cplx> in(n * count), spec(n * count);
    for (std::size_t f = 0; f < n; ++f)
        for (std::size_t j = 0; j < count; ++j)
        {
            const auto s = cube.at(m, f, t0 + j);
            in[f * count + j] = cplx(s.real(), s.imag()) * window[f];
        }
    const bool need_fft = std::any_of(bins.fft_bin.begin(), bins.fft_bin.end(), [](long b) { return b >= 0; });
    if (need_fft)
        fft::Plan(n, fft::Direction::Forward, count, count, 1).execute(in, spec);

    out.assign(bins.position.size() * count, 0.0);
    for (std::size_t r = 0; r < bins.position.size(); ++r)
    {
        if (bins.fft_bin[r] >= 0)
        {
            const auto k = static_cast<std::size_t>(bins.fft_bin[r]);
            for (std::size_t j = 0; j < count; ++j)
                out[r * count + j] = spec[k * count + j] * dtau;
            continue;
        }
        for (std::size_t f = 0; f < n; ++f)
        {
            const cplx kernel = std::polar(dtau, -2.0 * std::numbers::pi * bins.position[r] * static_cast<double>(f) / static_cast<double>(n));
            for (std::size_t j = 0; j < count; ++j)
                out[r * count + j] += in[f * count + j] * kernel;
        }
    }
}

} // namespace detail

// s'_m(r, t) = sum_tau w_R(tau) s_m(tau, t) exp(-j 2 pi (2 B r / (c T_c)) tau) dtau,
// evaluated on cfg.range_grid (FFT bins where the grid sits on r = k c / 2B).
inline RangeProfiles range_compress(const RadarCube &cube, const RadarConfig &cfg)
{
    detail::check_cube(cube, cfg);
    const auto bins = detail::map_range_bins(cfg);
    const auto window = cfg.range_window.make(cube.fast());

    RangeProfiles out;
    out.elements = cube.elements();
    out.ranges = cfg.range_grid.size();
    out.frames = cube.frames();
    out.data.resize(out.elements * out.ranges * out.frames);
    std::vector<cplx> block;
    for (std::size_t m = 0; m < cube.elements(); ++m)
    {
        detail::compress_block(cube, bins, window, m, 0, cube.frames(), block);
        for (std::size_t r = 0; r < out.ranges; ++r)
            for (std::size_t t = 0; t < out.frames; ++t)
                out.at(m, r, t) = block[r * out.frames + t];
    }
    return out;
}

// I(r, theta, t) = sum_m w^A_m conj(a_m(theta)) s'_m(r, t).
inline RadarImage beamform(const RangeProfiles &profiles, const RadarConfig &cfg)
{
    cfg.validate();
    detail::require(profiles.elements == cfg.elements(), "beamform: element count does not match the configuration");
    detail::require(profiles.ranges == cfg.range_grid.size(), "beamform: range count does not match the grid");
    const auto taper = cfg.antenna_window.make(cfg.elements());

    RadarImage img;
    img.ranges = profiles.ranges;
    img.angles = cfg.angle_grid.size();
    img.frames = profiles.frames;
    img.frame_rate = cfg.slow_time_rate;
    img.voxels.assign(img.ranges * img.angles * img.frames, 0.0);
    for (std::size_t a = 0; a < img.angles; ++a)
    {
        const auto b = detail::steering_weights(cfg, cfg.angle_grid[a], taper);
        for (std::size_t r = 0; r < img.ranges; ++r)
            for (std::size_t m = 0; m < profiles.elements; ++m)
                for (std::size_t t = 0; t < img.frames; ++t)
                    img.at(r, a, t) += b[m] * profiles.at(m, r, t);
    }
    return img;
}

// Subtracts the slow-time mean of every (r, theta) cell.
inline RadarImage remove_clutter(const RadarImage &img)
{
    detail::require(img.frames >= 2, "remove_clutter: at least 2 frames required");
    RadarImage out = img;
    for (std::size_t r = 0; r < img.ranges; ++r)
        for (std::size_t a = 0; a < img.angles; ++a)
        {
            cplx mean = 0.0;
            for (std::size_t t = 0; t < img.frames; ++t)
                mean += img.at(r, a, t);
            mean /= static_cast<double>(img.frames);
            for (std::size_t t = 0; t < img.frames; ++t)
                out.at(r, a, t) -= mean;
        }
    return out;
}

// I_A(r, theta) = mean_t |I(r, theta, t)|^2.
inline PowerMap power_map(const RadarImage &img)
{
    PowerMap map;
    map.ranges = img.ranges;
    map.angles = img.angles;
    map.values.assign(img.ranges * img.angles, 0.0);
    for (std::size_t r = 0; r < img.ranges; ++r)
        for (std::size_t a = 0; a < img.angles; ++a)
        {
            double s = 0.0;
            for (std::size_t t = 0; t < img.frames; ++t)
                s += std::norm(img.at(r, a, t));
            map.at(r, a) = img.frames > 0 ? s / static_cast<double>(img.frames) : 0.0;
        }
    return map;
}

// argmax of the map; ties go to the smaller range, then the smaller angle.
inline PeakCell strongest_cell(const PowerMap &map)
{
    PeakCell best;
    double best_value = 0.0;
    for (std::size_t r = 0; r < map.ranges; ++r)
        for (std::size_t a = 0; a < map.angles; ++a)
            if (map.at(r, a) > best_value)
            {
                best_value = map.at(r, a);
                best = {r, a};
            }
    if (!(best_value > 0.0))
        throw NoTarget("power map holds no energy");
    return best;
}

// d(t) = lambda / (4 pi) * unwrap(arg(series(t))).
inline RealSeries phase_to_displacement(std::span<const cplx> series, double wavelength, double frame_rate)
{
    std::vector<double> phase(series.size());
    for (std::size_t t = 0; t < series.size(); ++t)
        phase[t] = std::arg(series[t]);
    auto d = unwrap_phase(phase);
    const double scale = wavelength / (4.0 * std::numbers::pi);
    for (auto &v : d)
        v *= scale;
    return RealSeries(std::move(d), frame_rate);
}

inline RealSeries extract_displacement(const RadarImage &img, const PowerMap &map, const RadarConfig &cfg)
{
    detail::require(map.ranges == img.ranges && map.angles == img.angles, "extract_displacement: map and image disagree");
    const auto peak = strongest_cell(map);
    std::vector<cplx> series(img.frames);
    for (std::size_t t = 0; t < img.frames; ++t)
        series[t] = img.at(peak.range_index, peak.angle_index, t);
    return phase_to_displacement(series, cfg.wavelength(), cfg.slow_time_rate);
}

// ---------------------------------------------------------------------------
// Streaming chain
// ---------------------------------------------------------------------------

struct RadarTrack
{
    RealSeries displacement;
    PeakCell cell;
    double range = 0.0; // meters
    double angle = 0.0; // radians
    PowerMap power;
};

// Same result as range_compress -> beamform -> remove_clutter -> power_map ->
// extract_displacement, without materializing the image. The clutter-removed
// power map is b(theta)^T C_r conj(b(theta)), where C_r is the slow-time
// covariance of the element vector in range cell r; the displacement is then
// formed from the chosen cell only.
inline RadarTrack process_cube(const RadarCube &cube, const RadarConfig &cfg, std::size_t chunk_frames = 256)
{
    detail::check_cube(cube, cfg);
    detail::require(cube.frames() >= 2, "process_cube: at least 2 frames required");
    const std::size_t n_el = cube.elements(), n_r = cfg.range_grid.size(), n_t = cube.frames();
    const auto bins = detail::map_range_bins(cfg);
    const auto window = cfg.range_window.make(cube.fast());
    const auto taper = cfg.antenna_window.make(n_el);

    // Per range cell: element sums and the upper triangle of the outer-product sum.
    std::vector<cplx> sums(n_r * n_el, 0.0);
    std::vector<cplx> outer(n_r * n_el * n_el, 0.0);
    std::vector<std::vector<cplx>> blocks(n_el);
    for (std::size_t t0 = 0; t0 < n_t; t0 += chunk_frames)
    {
        const std::size_t count = std::min(chunk_frames, n_t - t0);
        for (std::size_t m = 0; m < n_el; ++m)
            detail::compress_block(cube, bins, window, m, t0, count, blocks[m]);
        for (std::size_t r = 0; r < n_r; ++r)
        {
            cplx *acc = &outer[r * n_el * n_el];
            for (std::size_t j = 0; j < count; ++j)
            {
                for (std::size_t m = 0; m < n_el; ++m)
                {
                    const cplx sm = blocks[m][r * count + j];
                    sums[r * n_el + m] += sm;
                    for (std::size_t k = m; k < n_el; ++k)
                        acc[m * n_el + k] += sm * std::conj(blocks[k][r * count + j]);
                }
            }
        }
    }

    const double inv_t = 1.0 / static_cast<double>(n_t);
    std::vector<std::vector<cplx>> steer;
    for (double theta : cfg.angle_grid)
        steer.push_back(detail::steering_weights(cfg, theta, taper));

    PowerMap map;
    map.ranges = n_r;
    map.angles = cfg.angle_grid.size();
    map.values.assign(n_r * map.angles, 0.0);
    std::vector<cplx> cov(n_el * n_el);
    for (std::size_t r = 0; r < n_r; ++r)
    {
        for (std::size_t m = 0; m < n_el; ++m)
            for (std::size_t k = m; k < n_el; ++k)
            {
                const cplx c = outer[(r * n_el + m) * n_el + k] * inv_t -
                               sums[r * n_el + m] * inv_t * std::conj(sums[r * n_el + k] * inv_t);
                cov[m * n_el + k] = c;
                cov[k * n_el + m] = std::conj(c);
            }
        for (std::size_t a = 0; a < map.angles; ++a)
        {
            const auto &b = steer[a];
            cplx q = 0.0;
            for (std::size_t m = 0; m < n_el; ++m)
            {
                cplx row = 0.0;
                for (std::size_t k = 0; k < n_el; ++k)
                    row += cov[m * n_el + k] * std::conj(b[k]);
                q += b[m] * row;
            }
            map.at(r, a) = std::max(q.real(), 0.0);
        }
    }

    const auto peak = strongest_cell(map);

    // Second pass over the chosen cell only.
    RadarConfig single = cfg;
    single.range_grid = {cfg.range_grid[peak.range_index]};
    const auto one_bin = detail::map_range_bins(single);
    const auto &b = steer[peak.angle_index];
    std::vector<cplx> series(n_t, 0.0);
    std::vector<cplx> block;
    for (std::size_t m = 0; m < n_el; ++m)
    {
        detail::compress_block(cube, one_bin, window, m, 0, n_t, block);
        const cplx mean = sums[peak.range_index * n_el + m] * inv_t;
        for (std::size_t t = 0; t < n_t; ++t)
            series[t] += b[m] * (block[t] - mean);
    }

    return RadarTrack{phase_to_displacement(series, cfg.wavelength(), cfg.slow_time_rate), peak,
                      cfg.range_grid[peak.range_index], cfg.angle_grid[peak.angle_index], std::move(map)};
}

} // namespace radfuse
