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

// Shared signal-processing primitives: analytic signal, phase unwrapping,
// lag estimation, sub-sample delays and tapering windows.

#include "radfuse/error.hpp"
#include "radfuse/fft.hpp"
#include "radfuse/series.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace radfuse
{

// Analytic signal x + jH[x] via the one-sided spectrum (negative bins zeroed,
// positive bins doubled, DC and Nyquist kept). Computed at the exact input
// length. The real part is the input itself.
inline ComplexSeries hilbert(const RealSeries &x)
{
    const std::size_t n = x.size();
    detail::require(n >= 4, "hilbert: at least 4 samples required");

    auto X = fft::forward(x.samples());
    const std::size_t positive_end = (n % 2 == 0) ? n / 2 : (n + 1) / 2;
    for (std::size_t k = 1; k < positive_end; ++k)
        X[k] *= 2.0;
    for (std::size_t k = (n % 2 == 0) ? n / 2 + 1 : positive_end; k < n; ++k)
        X[k] = 0.0;
    const auto y = fft::inverse(X);

    std::vector<cplx> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = cplx(x[i], y[i].imag());
    return ComplexSeries(std::move(out), x.sample_rate(), x.start_time());
}

// Adds multiples of 2*pi so consecutive differences fall in (-pi, pi].
// Each output differs from its input by an exact integer multiple of 2*pi.
inline std::vector<double> unwrap_phase(std::span<const double> phase)
{
    detail::require(!phase.empty(), "unwrap_phase: empty input");
    constexpr double two_pi = 2.0 * std::numbers::pi;
    std::vector<double> out(phase.size());
    out[0] = phase[0];
    double turns = 0.0;
    for (std::size_t i = 1; i < phase.size(); ++i)
    {
        detail::require(std::isfinite(phase[i]), "unwrap_phase: non-finite value");
        const double step = (phase[i] + two_pi * turns) - out[i - 1];
        // smallest number of turns bringing the step into (-pi, pi]
        turns -= std::ceil((step - std::numbers::pi) / two_pi);
        out[i] = phase[i] + two_pi * turns;
    }
    return out;
}

// Integer lag tau (in samples) in [-max_lag, max_lag] maximizing the circular
// correlation sum_t ref(t) * sig((t + tau) mod L), L the longer length, the
// shorter series zero-extended. A positive result means `sig` lags (is
// delayed relative to) `ref`. Circular indexing matches the circular
// correction applied by fractional_shift and avoids the pull toward zero lag
// that the shrinking overlap of a linear correlation introduces. Ties go to
// the smallest |tau|, then to the negative lag.
inline long xcorr_peak_lag(const RealSeries &ref, const RealSeries &sig, std::size_t max_lag)
{
    detail::require(ref.sample_rate() == sig.sample_rate(), "xcorr_peak_lag: sample rates differ");
    detail::require(max_lag < std::min(ref.size(), sig.size()), "xcorr_peak_lag: max_lag must be shorter than both series");

    const auto a = ref.samples();
    const auto b = sig.samples();
    const long len = static_cast<long>(std::max(a.size(), b.size()));
    auto score = [&](long lag) {
        double s = 0.0;
        for (std::size_t t = 0; t < a.size(); ++t)
        {
            const long j = ((static_cast<long>(t) + lag) % len + len) % len;
            if (j < static_cast<long>(b.size()))
                s += a[t] * b[static_cast<std::size_t>(j)];
        }
        return s;
    };

    long best_lag = 0;
    double best = score(0);
    for (long m = 1; m <= static_cast<long>(max_lag); ++m)
    {
        for (long lag : {-m, m})
        {
            const double s = score(lag);
            if (s > best)
            {
                best = s;
                best_lag = lag;
            }
        }
    }
    return best_lag;
}

// Circular delay by `tau` seconds in the frequency domain: the output is
// x(t - tau). Requires |tau| < duration / 4.
inline RealSeries fractional_shift(const RealSeries &x, double tau)
{
    detail::require(std::isfinite(tau) && std::abs(tau) < x.duration() / 4.0,
                    "fractional_shift: |tau| must be below a quarter of the duration");
    if (tau == 0.0)
        return x;

    const std::size_t n = x.size();
    auto X = fft::forward(x.samples());
    for (std::size_t k = 0; k < n; ++k)
    {
        const double w = fft::bin_frequency(k, n, x.sample_rate());
        X[k] *= std::polar(1.0, -w * tau);
    }
    const auto y = fft::inverse(X);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = y[i].real();
    return x.with_samples(std::move(out));
}

// ---------------------------------------------------------------------------
// Windows
// ---------------------------------------------------------------------------

// Symmetric Taylor window with `nbar` nearly constant-level sidelobes at
// `sidelobe_db` (negative), normalized so the continuous window peaks at 1.
inline std::vector<double> taylor_window(std::size_t n, int nbar = 4, double sidelobe_db = -30.0)
{
    detail::require(n >= 1, "taylor_window: n must be positive");
    detail::require(sidelobe_db < 0.0, "taylor_window: sidelobe level must be negative dB");
    if (n == 1)
        return {1.0};
    detail::require(nbar >= 1, "taylor_window: nbar must be >= 1");
    detail::require(static_cast<std::size_t>(nbar) < n, "taylor_window: nbar must be smaller than n");

    const double b = std::pow(10.0, -sidelobe_db / 20.0);
    const double a = std::acosh(b) / std::numbers::pi;
    const double a2 = a * a;
    const double s2 = nbar * nbar / (a2 + (nbar - 0.5) * (nbar - 0.5));

    std::vector<double> coeff(static_cast<std::size_t>(nbar - 1));
    for (int m = 1; m < nbar; ++m)
    {
        double num = (m % 2 == 1) ? 1.0 : -1.0;
        double den = 2.0;
        for (int j = 1; j < nbar; ++j)
        {
            num *= 1.0 - (m * m) / s2 / (a2 + (j - 0.5) * (j - 0.5));
            if (j != m)
                den *= 1.0 - static_cast<double>(m * m) / static_cast<double>(j * j);
        }
        coeff[static_cast<std::size_t>(m - 1)] = num / den;
    }

    const double len = static_cast<double>(n);
    auto eval = [&](double i) {
        double w = 1.0;
        for (int m = 1; m < nbar; ++m)
            w += 2.0 * coeff[static_cast<std::size_t>(m - 1)] *
                 std::cos(2.0 * std::numbers::pi * m * (i - len / 2.0 + 0.5) / len);
        return w;
    };
    const double scale = 1.0 / eval((len - 1.0) / 2.0);

    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i)
        w[i] = eval(static_cast<double>(i)) * scale;
    // exact symmetry
    for (std::size_t i = 0; i < n / 2; ++i)
        w[n - 1 - i] = w[i];
    return w;
}

// Symmetric Hann window; endpoints are zero for n > 1.
inline std::vector<double> hann_window(std::size_t n)
{
    detail::require(n >= 1, "hann_window: n must be positive");
    if (n == 1)
        return {1.0};
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i)
        w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n - 1));
    for (std::size_t i = 0; i < n / 2; ++i)
        w[n - 1 - i] = w[i];
    return w;
}

enum class WindowKind
{
    Rectangular,
    Hann,
    Taylor,
};

struct WindowSpec
{
    WindowKind kind = WindowKind::Rectangular;
    int nbar = 4;
    double sidelobe_db = -30.0;

    std::vector<double> make(std::size_t n) const
    {
        switch (kind)
        {
        case WindowKind::Hann:
            return hann_window(n);
        case WindowKind::Taylor:
            return taylor_window(n, nbar, sidelobe_db);
        case WindowKind::Rectangular:
            break;
        }
        return std::vector<double>(n, 1.0);
    }
};

inline const char *to_string(WindowKind k)
{
    switch (k)
    {
    case WindowKind::Hann:
        return "hann";
    case WindowKind::Taylor:
        return "taylor";
    case WindowKind::Rectangular:
        break;
    }
    return "rectangular";
}

inline WindowKind window_kind_from_string(const std::string &s)
{
    if (s == "hann")
        return WindowKind::Hann;
    if (s == "taylor")
        return WindowKind::Taylor;
    if (s == "rectangular" || s == "rect")
        return WindowKind::Rectangular;
    throw InvalidInput("unknown window kind '" + s + "'");
}

} // namespace radfuse
