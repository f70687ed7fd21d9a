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

// Variational mode decomposition, univariate and multivariate.
//
// Both decompositions run through one solver: vmd_decompose is
// mvmd_decompose on a single channel. The solver works on the one-sided
// spectrum of the (optionally mirror-extended) signal with time measured in
// samples, so frequencies inside the iteration are in rad/sample and alpha is
// dimensionless. Center frequencies are reported in rad/s.
//
// Each iteration is a Jacobi sweep: every mode update reads the other modes
// from the previous iteration, so per-(mode, channel) updates are independent.
// Cross-channel reductions are summed in sorted order, which makes the result
// bit-identical under channel permutation.

#include "radfuse/error.hpp"
#include "radfuse/fft.hpp"
#include "radfuse/series.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace radfuse
{

enum class InitPolicy
{
    Uniform,       // omega_k = (pi * fs / 2) * k / K, k = 1..K
    SpectralPeaks, // strongest peaks of the pooled periodogram
    Explicit,      // VmdConfig::init_freqs_hz
};

enum class FrequencyPooling
{
    AllChannels,   // one centroid over the energy of every channel
    SingleChannel, // centroid of VmdConfig::pooling_channel only
};

struct VmdConfig
{
    std::size_t modes = 4;
    double alpha = 2000.0;
    double eta = 0.1;
    double tol = 1e-7;
    std::size_t max_iter = 500;
    InitPolicy init = InitPolicy::Uniform;
    std::vector<double> init_freqs_hz;
    bool mirror = true;
    FrequencyPooling pooling = FrequencyPooling::AllChannels;
    std::size_t pooling_channel = 0;

    void validate() const
    {
        detail::require(modes >= 1, "VmdConfig: at least one mode");
        detail::require(std::isfinite(alpha) && alpha > 0.0, "VmdConfig: alpha must be positive");
        detail::require(std::isfinite(eta) && eta >= 0.0, "VmdConfig: eta must be non-negative");
        detail::require(std::isfinite(tol) && tol > 0.0, "VmdConfig: tol must be positive");
        detail::require(max_iter >= 1, "VmdConfig: max_iter must be >= 1");
        if (init == InitPolicy::Explicit)
            detail::require(init_freqs_hz.size() == modes, "VmdConfig: explicit init needs one frequency per mode");
    }
};

struct ModeSet
{
    std::vector<RealSeries> modes;
    std::vector<double> center_freqs; // rad/s, ascending
    RealSeries residual;              // input - sum of modes
    std::size_t iterations_used = 0;
    bool converged = false;
};

class MultiChannelSeries
{
public:
    explicit MultiChannelSeries(std::vector<RealSeries> channels, std::vector<std::string> ids = {})
        : channels_(std::move(channels)), ids_(std::move(ids))
    {
        detail::require(!channels_.empty(), "MultiChannelSeries: at least one channel");
        for (const auto &c : channels_)
        {
            detail::require(c.size() == channels_.front().size(), "MultiChannelSeries: channel lengths differ");
            detail::require(c.sample_rate() == channels_.front().sample_rate(),
                            "MultiChannelSeries: channel sample rates differ");
        }
        if (ids_.empty())
            for (std::size_t i = 0; i < channels_.size(); ++i)
                ids_.push_back(std::to_string(i));
        detail::require(ids_.size() == channels_.size(), "MultiChannelSeries: one id per channel");
    }

    std::size_t channel_count() const noexcept { return channels_.size(); }
    std::size_t length() const noexcept { return channels_.front().size(); }
    double sample_rate() const noexcept { return channels_.front().sample_rate(); }
    const RealSeries &operator[](std::size_t c) const { return channels_[c]; }
    const std::vector<RealSeries> &channels() const noexcept { return channels_; }
    const std::vector<std::string> &ids() const noexcept { return ids_; }

private:
    std::vector<RealSeries> channels_;
    std::vector<std::string> ids_;
};

struct MultiModeSet
{
    std::vector<std::vector<RealSeries>> modes; // [mode][channel]
    std::vector<double> center_freqs;           // rad/s, one per mode, ascending
    std::vector<RealSeries> duals;              // [channel]
    std::vector<double> reconstruction_error;   // [channel] ||x_c - sum_k u_kc||
    std::size_t iterations_used = 0;
    bool converged = false;

    std::size_t mode_count() const noexcept { return modes.size(); }
    std::size_t channel_count() const noexcept { return duals.size(); }
};

// ---------------------------------------------------------------------------
// Per-iteration updates
// ---------------------------------------------------------------------------

inline double wiener_gain(double alpha, double omega, double omega_k)
{
    const double d = omega - omega_k;
    return 1.0 / (1.0 + 2.0 * alpha * d * d);
}

// (residual + dual / 2) / (1 + 2 alpha (omega - omega_k)^2) per bin, where
// `residual` already excludes mode k. Frequencies come from the spectra's
// own grid.
inline Spectrum update_mode_spectrum(const Spectrum &residual, const Spectrum &dual, double alpha, double omega_k)
{
    detail::require(residual.same_grid(dual), "update_mode_spectrum: spectra are on different grids");
    Spectrum out{std::vector<cplx>(residual.size()), residual.bin_spacing, residual.layout};
    for (std::size_t i = 0; i < residual.size(); ++i)
        out.bins[i] = (residual.bins[i] + 0.5 * dual.bins[i]) * wiener_gain(alpha, residual.frequency(i), omega_k);
    return out;
}

struct SpectralMoments
{
    double first = 0.0;  // sum omega |u|^2 over omega >= 0
    double energy = 0.0; // sum |u|^2 over omega >= 0
};

inline SpectralMoments spectral_moments(const Spectrum &s)
{
    SpectralMoments m;
    for (std::size_t i = 0; i < s.size(); ++i)
    {
        const double w = s.frequency(i);
        if (w < 0.0)
            continue;
        const double p = std::norm(s.bins[i]);
        m.first += w * p;
        m.energy += p;
    }
    return m;
}

struct CenterFrequency
{
    double omega;
    bool zero_energy; // no positive-frequency energy; omega is the previous value
};

// Power-weighted centroid of the non-negative-frequency bins.
inline CenterFrequency update_center_frequency(const Spectrum &mode_spectrum, double previous_omega)
{
    const auto m = spectral_moments(mode_spectrum);
    if (!(m.energy > 0.0))
        return {previous_omega, true};
    return {m.first / m.energy, false};
}

namespace detail
{

// Order-independent sum: the same multiset of values always gives the same bits.
inline double sorted_sum(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    double s = 0.0;
    for (double x : v)
        s += x;
    return s;
}

// Mirror-extend by half the length on each side: [rev(x[0:h]), x, rev(x[h:n])].
inline std::vector<double> mirror_extend(std::span<const double> x)
{
    const std::size_t n = x.size(), h = n / 2;
    std::vector<double> out;
    out.reserve(2 * n);
    for (std::size_t i = h; i-- > 0;)
        out.push_back(x[i]);
    out.insert(out.end(), x.begin(), x.end());
    for (std::size_t i = n; i-- > h;)
        out.push_back(x[i]);
    return out;
}

// Real time signal of length t_len from its one-sided spectrum (bins 0..t_len/2).
inline std::vector<double> from_one_sided(const std::vector<cplx> &half, std::size_t t_len)
{
    std::vector<cplx> full(t_len);
    for (std::size_t k = 0; k < half.size(); ++k)
        full[k] = half[k];
    for (std::size_t k = 1; k < half.size(); ++k)
        if (t_len - k >= half.size())
            full[t_len - k] = std::conj(half[k]);
    const auto y = fft::inverse(full);
    std::vector<double> out(t_len);
    for (std::size_t i = 0; i < t_len; ++i)
        out[i] = y[i].real();
    return out;
}

// Energy of the real time signal whose one-sided spectrum is `half`
// (Parseval, including the 1/T factor).
inline double time_energy(const std::vector<cplx> &half, std::size_t t_len)
{
    double s = 0.0;
    for (std::size_t k = 0; k < half.size(); ++k)
    {
        const bool self_conjugate = (k == 0) || (t_len % 2 == 0 && k == t_len / 2);
        s += (self_conjugate ? 1.0 : 2.0) * std::norm(half[k]);
    }
    return s / static_cast<double>(t_len);
}

inline double time_distance(const std::vector<cplx> &a, const std::vector<cplx> &b, std::size_t t_len)
{
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
    {
        const bool self_conjugate = (k == 0) || (t_len % 2 == 0 && k == t_len / 2);
        s += (self_conjugate ? 1.0 : 2.0) * std::norm(a[k] - b[k]);
    }
    return s / static_cast<double>(t_len);
}

// Strongest local maxima of the pooled Hann-windowed periodogram, in rad/sample.
inline std::vector<double> spectral_peak_init(const MultiChannelSeries &x, std::size_t k_modes)
{
    const std::size_t n = x.length();
    std::vector<double> window(n);
    for (std::size_t i = 0; i < n; ++i)
        window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));

    std::vector<std::vector<double>> per_channel;
    for (const auto &ch : x.channels())
    {
        std::vector<double> w(n);
        double mean = 0.0;
        for (double v : ch.samples())
            mean += v;
        mean /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i)
            w[i] = (ch[i] - mean) * window[i];
        const auto X = fft::forward(std::span<const double>(w));
        std::vector<double> p(n / 2 + 1);
        for (std::size_t k = 0; k < p.size(); ++k)
            p[k] = std::norm(X[k]);
        per_channel.push_back(std::move(p));
    }
    std::vector<double> pooled(n / 2 + 1);
    for (std::size_t k = 0; k < pooled.size(); ++k)
    {
        std::vector<double> terms;
        for (const auto &p : per_channel)
            terms.push_back(p[k]);
        pooled[k] = sorted_sum(std::move(terms));
    }

    constexpr std::size_t reach = 2; // a peak dominates +-2 bins
    std::vector<std::size_t> peaks;
    for (std::size_t k = 1; k + 1 < pooled.size(); ++k)
    {
        bool is_peak = pooled[k] > 0.0;
        for (std::size_t j = (k > reach ? k - reach : 0); is_peak && j <= std::min(pooled.size() - 1, k + reach); ++j)
            if (j != k && (pooled[j] > pooled[k] || (pooled[j] == pooled[k] && j < k)))
                is_peak = false;
        if (is_peak)
            peaks.push_back(k);
    }
    std::stable_sort(peaks.begin(), peaks.end(), [&](std::size_t a, std::size_t b) { return pooled[a] > pooled[b]; });

    std::vector<double> omega;
    for (std::size_t i = 0; i < std::min(k_modes, peaks.size()); ++i)
        omega.push_back(2.0 * std::numbers::pi * static_cast<double>(peaks[i]) / static_cast<double>(n));
    // Not enough peaks: fall back to the uniform grid for the rest.
    for (std::size_t k = omega.size(); k < k_modes; ++k)
        omega.push_back(0.5 * std::numbers::pi * static_cast<double>(k + 1) / static_cast<double>(k_modes));
    std::sort(omega.begin(), omega.end());
    return omega;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Solvers
// ---------------------------------------------------------------------------

inline MultiModeSet mvmd_decompose(const MultiChannelSeries &x, const VmdConfig &cfg)
{
    cfg.validate();
    const std::size_t n = x.length();
    const std::size_t n_ch = x.channel_count();
    const std::size_t n_modes = cfg.modes;
    const double fs = x.sample_rate();
    detail::require(n >= 8 * n_modes, "mvmd_decompose: need at least 8 samples per mode");
    if (cfg.pooling == FrequencyPooling::SingleChannel)
        detail::require(cfg.pooling_channel < n_ch, "mvmd_decompose: pooling channel out of range");

    const std::size_t offset = cfg.mirror ? n / 2 : 0;
    const std::size_t t_len = cfg.mirror ? 2 * n : n;
    const std::size_t n_bins = t_len / 2 + 1;
    const double spacing = 2.0 * std::numbers::pi / static_cast<double>(t_len); // rad/sample

    std::vector<Spectrum> signal(n_ch);
    for (std::size_t c = 0; c < n_ch; ++c)
    {
        const auto ext = cfg.mirror ? detail::mirror_extend(x[c].samples()) : x[c].values();
        auto full = fft::forward(std::span<const double>(ext));
        full.resize(n_bins);
        signal[c] = Spectrum{std::move(full), spacing, SpectrumLayout::OneSided};
    }

    std::vector<double> omega(n_modes);
    switch (cfg.init)
    {
    case InitPolicy::Uniform:
        for (std::size_t k = 0; k < n_modes; ++k)
            omega[k] = 0.5 * std::numbers::pi * static_cast<double>(k + 1) / static_cast<double>(n_modes);
        break;
    case InitPolicy::SpectralPeaks:
        omega = detail::spectral_peak_init(x, n_modes);
        break;
    case InitPolicy::Explicit:
        for (std::size_t k = 0; k < n_modes; ++k)
        {
            omega[k] = 2.0 * std::numbers::pi * cfg.init_freqs_hz[k] / fs;
            detail::require(omega[k] >= 0.0 && omega[k] <= std::numbers::pi,
                            "mvmd_decompose: explicit init frequency outside [0, fs/2]");
        }
        break;
    }

    const Spectrum zero{std::vector<cplx>(n_bins), spacing, SpectrumLayout::OneSided};
    std::vector<std::vector<Spectrum>> u(n_modes, std::vector<Spectrum>(n_ch, zero));
    std::vector<Spectrum> dual(n_ch, zero);

    // Gauss-Seidel sweep over modes: mode k sees the already updated modes
    // below it, and its center frequency moves before mode k + 1 is solved.
    // Updating all modes from the previous iterate instead is unstable once
    // two or more modes share a band. Channels stay independent within a mode.
    std::vector<std::vector<cplx>> total(n_ch, std::vector<cplx>(n_bins));
    std::size_t iter = 0;
    bool converged = false;
    while (iter < cfg.max_iter && !converged)
    {
        ++iter;
        std::vector<double> change;
        change.reserve(n_modes * n_ch);
        for (std::size_t k = 0; k < n_modes; ++k)
        {
            std::vector<Spectrum> next;
            next.reserve(n_ch);
            for (std::size_t c = 0; c < n_ch; ++c)
            {
                Spectrum residual = signal[c];
                for (std::size_t i = 0; i < n_bins; ++i)
                    residual.bins[i] -= total[c][i] - u[k][c].bins[i];
                next.push_back(update_mode_spectrum(residual, dual[c], cfg.alpha, omega[k]));
            }

            if (cfg.pooling == FrequencyPooling::SingleChannel)
                omega[k] = update_center_frequency(next[cfg.pooling_channel], omega[k]).omega;
            else
            {
                std::vector<double> first, energy;
                for (std::size_t c = 0; c < n_ch; ++c)
                {
                    const auto m = spectral_moments(next[c]);
                    first.push_back(m.first);
                    energy.push_back(m.energy);
                }
                const double e = detail::sorted_sum(std::move(energy));
                if (e > 0.0)
                    omega[k] = detail::sorted_sum(std::move(first)) / e;
            }

            for (std::size_t c = 0; c < n_ch; ++c)
            {
                change.push_back(detail::time_distance(next[c].bins, u[k][c].bins, t_len) /
                                 (detail::time_energy(u[k][c].bins, t_len) + 1e-12));
                for (std::size_t i = 0; i < n_bins; ++i)
                    total[c][i] += next[c].bins[i] - u[k][c].bins[i];
                u[k][c] = std::move(next[c]);
            }
        }

        for (std::size_t c = 0; c < n_ch; ++c)
            for (std::size_t i = 0; i < n_bins; ++i)
                dual[c].bins[i] += cfg.eta * (signal[c].bins[i] - total[c][i]);

        // averaged over channels so duplicating a channel does not move the stopping point
        converged = detail::sorted_sum(std::move(change)) / static_cast<double>(n_ch) < cfg.tol;
    }

    std::vector<std::size_t> order(n_modes);
    for (std::size_t k = 0; k < n_modes; ++k)
        order[k] = k;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return omega[a] < omega[b]; });

    auto to_series = [&](const Spectrum &s, std::size_t c) {
        const auto full = detail::from_one_sided(s.bins, t_len);
        std::vector<double> trimmed(full.begin() + static_cast<std::ptrdiff_t>(offset),
                                    full.begin() + static_cast<std::ptrdiff_t>(offset + n));
        return x[c].with_samples(std::move(trimmed));
    };

    MultiModeSet out;
    out.iterations_used = iter;
    out.converged = converged;
    for (std::size_t k : order)
    {
        out.center_freqs.push_back(omega[k] * fs);
        std::vector<RealSeries> per_channel;
        for (std::size_t c = 0; c < n_ch; ++c)
            per_channel.push_back(to_series(u[k][c], c));
        out.modes.push_back(std::move(per_channel));
    }
    for (std::size_t c = 0; c < n_ch; ++c)
    {
        out.duals.push_back(to_series(dual[c], c));
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i)
        {
            double r = x[c][i];
            for (std::size_t k = 0; k < n_modes; ++k)
                r -= out.modes[k][c][i];
            err += r * r;
        }
        out.reconstruction_error.push_back(std::sqrt(err));
    }
    return out;
}

inline ModeSet vmd_decompose(const RealSeries &x, const VmdConfig &cfg)
{
    auto multi = mvmd_decompose(MultiChannelSeries({x}), cfg);
    std::vector<RealSeries> modes;
    std::vector<double> residual(x.values());
    for (auto &m : multi.modes)
    {
        for (std::size_t i = 0; i < residual.size(); ++i)
            residual[i] -= m[0][i];
        modes.push_back(std::move(m[0]));
    }
    return ModeSet{std::move(modes), std::move(multi.center_freqs), x.with_samples(std::move(residual)),
                   multi.iterations_used, multi.converged};
}

// ||x_c - sum_k u_kc|| / ||x_c|| (0 for an all-zero channel).
inline double relative_reconstruction_error(const MultiChannelSeries &x, const MultiModeSet &m, std::size_t c)
{
    double e = 0.0;
    for (double v : x[c].samples())
        e += v * v;
    return e > 0.0 ? m.reconstruction_error[c] / std::sqrt(e) : 0.0;
}

} // namespace radfuse
