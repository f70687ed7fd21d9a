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

// Multi-radar integration: respiratory mode selection, time alignment to a
// reference channel and projection onto the first principal component.

#include "radfuse/dsp.hpp"
#include "radfuse/eig.hpp"
#include "radfuse/error.hpp"
#include "radfuse/series.hpp"
#include "radfuse/vmd.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace radfuse
{

struct FusionConfig
{
    double f_rr = 0.30;          // expected respiratory frequency, Hz
    double max_align_lag = 5.0;  // s
    double band_lo = 0.1;        // Hz
    double band_hi = 0.7;        // Hz

    void validate() const
    {
        detail::require(std::isfinite(band_lo) && std::isfinite(band_hi) && std::isfinite(f_rr),
                        "FusionConfig: non-finite value");
        detail::require(band_lo < f_rr && f_rr < band_hi, "FusionConfig: need band_lo < f_rr < band_hi");
        detail::require(max_align_lag > 0.0, "FusionConfig: max_align_lag must be positive");
    }
};

struct AlignedChannels
{
    std::vector<RealSeries> channels;
    std::vector<double> lags; // s; positive = channel lags the reference
    std::vector<bool> flagged; // zero-power channels passed through untouched
};

struct FusedSignal
{
    RealSeries upsilon;
    std::vector<double> weights;     // v1, unit norm
    std::size_t reference_channel = 0;
    std::vector<double> lags;        // s
    std::vector<bool> flagged;
    std::size_t selected_mode = 0;   // index into the ascending center frequencies
    std::vector<double> center_freqs; // rad/s
    std::vector<double> eigenvalues; // descending
};

// Index of the center frequency closest to 2 pi f_rr; near-ties go to the
// lower frequency.
inline std::size_t select_respiratory_mode(std::span<const double> center_freqs, const FusionConfig &cfg)
{
    cfg.validate();
    detail::require(!center_freqs.empty(), "select_respiratory_mode: no modes");
    const double target = 2.0 * std::numbers::pi * cfg.f_rr;
    const double tol = 1e-9 * target;
    std::size_t best = 0;
    for (std::size_t k = 1; k < center_freqs.size(); ++k)
    {
        const double dk = std::abs(center_freqs[k] - target), db = std::abs(center_freqs[best] - target);
        if (dk < db - tol || (std::abs(dk - db) <= tol && center_freqs[k] < center_freqs[best]))
            best = k;
    }
    const double hz = center_freqs[best] / (2.0 * std::numbers::pi);
    if (!(hz >= cfg.band_lo && hz <= cfg.band_hi))
        throw NoRespiratoryMode("closest mode sits at " + std::to_string(hz) + " Hz, outside the respiratory band");
    return best;
}

inline double mean_square(const RealSeries &x)
{
    double s = 0.0;
    for (double v : x.samples())
        s += v * v;
    return s / static_cast<double>(x.size());
}

// Channel with the largest mean-square value; ties go to the lowest index.
inline std::size_t pick_reference_channel(std::span<const RealSeries> imfs)
{
    detail::require(!imfs.empty(), "pick_reference_channel: no channels");
    std::size_t best = 0;
    double best_power = mean_square(imfs[0]);
    for (std::size_t c = 1; c < imfs.size(); ++c)
    {
        const double p = mean_square(imfs[c]);
        if (p > best_power)
        {
            best_power = p;
            best = c;
        }
    }
    return best;
}

namespace detail
{

inline void require_same_grid(std::span<const RealSeries> xs)
{
    require(!xs.empty(), "fusion: no channels");
    for (const auto &x : xs)
        require(x.size() == xs[0].size() && x.sample_rate() == xs[0].sample_rate(),
                "fusion: channels must share length and sample rate");
}

} // namespace detail

// Estimates each channel's delay against the reference and advances it by
// that delay. The search is limited to max_align_lag and to less than a
// quarter of the record. When the true relative delay lies inside that window
// the aligned channel peaks at lag zero against the reference.
inline AlignedChannels align_channels(std::span<const RealSeries> imfs, std::size_t reference, const FusionConfig &cfg)
{
    cfg.validate();
    detail::require_same_grid(imfs);
    detail::require(reference < imfs.size(), "align_channels: reference channel out of range");
    const std::size_t n = imfs[0].size();
    const double fs = imfs[0].sample_rate();
    const auto quarter = static_cast<std::size_t>(std::ceil(static_cast<double>(n) / 4.0));
    const auto max_lag = std::min(static_cast<std::size_t>(std::floor(cfg.max_align_lag * fs)), quarter > 0 ? quarter - 1 : 0);

    AlignedChannels out;
    for (std::size_t c = 0; c < imfs.size(); ++c)
    {
        const bool dead = mean_square(imfs[c]) == 0.0;
        out.flagged.push_back(dead);
        if (c == reference || dead)
        {
            out.channels.push_back(imfs[c]);
            out.lags.push_back(0.0);
            continue;
        }
        const long lag = xcorr_peak_lag(imfs[reference], imfs[c], max_lag);
        const double tau = static_cast<double>(lag) / fs;
        out.lags.push_back(tau);
        out.channels.push_back(lag == 0 ? imfs[c] : fractional_shift(imfs[c], -tau));
    }
    return out;
}

struct PrincipalComponent
{
    RealSeries upsilon;
    std::vector<double> weights;
    std::vector<double> eigenvalues;
    HermitianMatrix correlation;
};

// R = mean_t u(t) u(t)^T (no centering or scaling), upsilon = v1^T u with v1
// signed so that upsilon correlates non-negatively with the reference.
inline PrincipalComponent integrate_pca(std::span<const RealSeries> aligned, std::size_t reference = 0)
{
    detail::require_same_grid(aligned);
    detail::require(reference < aligned.size(), "integrate_pca: reference channel out of range");
    const std::size_t c_n = aligned.size(), n = aligned[0].size();
    detail::require(c_n <= 64, "integrate_pca: at most 64 channels");

    HermitianMatrix r(c_n);
    for (std::size_t i = 0; i < c_n; ++i)
        for (std::size_t j = i; j < c_n; ++j)
        {
            double s = 0.0;
            for (std::size_t t = 0; t < n; ++t)
                s += aligned[i][t] * aligned[j][t];
            r(i, j) = s / static_cast<double>(n);
            r(j, i) = r(i, j);
        }
    const auto eig = hermitian_eig(r);

    std::vector<double> v(c_n);
    for (std::size_t c = 0; c < c_n; ++c)
        v[c] = eig.vectors[0][c].real();

    std::vector<double> ups(n, 0.0);
    for (std::size_t t = 0; t < n; ++t)
        for (std::size_t c = 0; c < c_n; ++c)
            ups[t] += v[c] * aligned[c][t];

    double agreement = 0.0;
    for (std::size_t t = 0; t < n; ++t)
        agreement += ups[t] * aligned[reference][t];
    if (agreement < 0.0)
    {
        for (auto &w : v)
            w = -w;
        for (auto &u : ups)
            u = -u;
    }
    return {aligned[0].with_samples(std::move(ups)), std::move(v), eig.values, std::move(r)};
}

// mvmd -> respiratory mode -> reference channel -> alignment -> PCA.
inline FusedSignal fuse(const MultiChannelSeries &displacements, const VmdConfig &vmd_cfg, const FusionConfig &cfg)
{
    cfg.validate();
    const auto modes = mvmd_decompose(displacements, vmd_cfg);
    const std::size_t k = select_respiratory_mode(modes.center_freqs, cfg);
    const auto &imfs = modes.modes[k];
    const std::size_t c0 = pick_reference_channel(imfs);
    auto aligned = align_channels(imfs, c0, cfg);
    auto pc = integrate_pca(aligned.channels, c0);

    return FusedSignal{std::move(pc.upsilon), std::move(pc.weights), c0, std::move(aligned.lags), std::move(aligned.flagged),
                       k, modes.center_freqs, std::move(pc.eigenvalues)};
}

} // namespace radfuse
