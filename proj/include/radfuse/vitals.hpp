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

// Breath detection on the fused waveform, interval pairing against a
// reference and the RRI / rate accuracy metrics.

#include "radfuse/error.hpp"
#include "radfuse/series.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace radfuse
{

struct PeakConfig
{
    double min_separation = 1.5; // s
    double min_prominence = 0.3; // in units of the signal's standard deviation

    void validate() const
    {
        detail::require(min_separation > 0.0 && std::isfinite(min_separation), "PeakConfig: min_separation must be positive");
        detail::require(min_prominence >= 0.0 && std::isfinite(min_prominence), "PeakConfig: min_prominence must be >= 0");
    }
};

struct RespiratoryEstimate
{
    std::vector<double> peak_times; // s, strictly increasing
    std::vector<double> intervals;  // s
    std::vector<double> rates;      // breaths per minute
};

struct IntervalPair
{
    double estimate;  // s
    double reference; // s
};

struct MatchResult
{
    std::vector<IntervalPair> pairs;
    std::size_t matched_peaks = 0;
    std::size_t unmatched_reference = 0;
    std::size_t unmatched_estimate = 0;
};

struct MetricReport
{
    double rmse_rri = 0.0; // s
    double mae_rr = 0.0;   // bpm
    double accuracy = 0.0; // fraction
    double theta_rr = 2.0; // bpm
    std::size_t matched_count = 0;
};

namespace detail
{

// Prominence of the peak at p: height above the higher of the two lowest
// points reached before meeting a strictly higher sample on either side.
inline double prominence(std::span<const double> x, std::size_t p)
{
    double left = x[p];
    for (std::size_t i = p; i-- > 0;)
    {
        if (x[i] > x[p])
            break;
        left = std::min(left, x[i]);
    }
    double right = x[p];
    for (std::size_t i = p + 1; i < x.size(); ++i)
    {
        if (x[i] > x[p])
            break;
        right = std::min(right, x[i]);
    }
    return x[p] - std::max(left, right);
}

} // namespace detail

// Local maxima (flat tops resolve to their middle sample) whose prominence is
// at least min_prominence * std(signal), thinned so that no two survivors are
// closer than min_separation (the higher one wins), then refined by a
// parabola through the three samples around each peak.
inline std::vector<double> detect_peaks(const RealSeries &signal, const PeakConfig &cfg = {})
{
    cfg.validate();
    const auto x = signal.samples();
    const double fs = signal.sample_rate();
    detail::require(static_cast<double>(x.size()) > 2.0 * cfg.min_separation * fs,
                    "detect_peaks: signal shorter than two minimum separations");

    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    double var = 0.0;
    for (double v : x)
        var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(x.size()));
    if (!(sd > 0.0))
        return {};
    const double min_prom = cfg.min_prominence * sd;

    std::vector<std::size_t> cand;
    for (std::size_t i = 1; i + 1 < x.size();)
    {
        if (!(x[i] > x[i - 1]))
        {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < x.size() && x[j + 1] == x[i])
            ++j;
        if (j + 1 < x.size() && x[j + 1] < x[i])
        {
            const std::size_t p = (i + j) / 2;
            const double prom = detail::prominence(x, p);
            if (prom >= min_prom && prom > 0.0)
                cand.push_back(p);
        }
        i = j + 1;
    }

    // Greedy thinning, highest first; equal heights keep the earlier peak.
    const double distance = cfg.min_separation * fs;
    std::vector<std::size_t> order(cand.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[cand[a]] > x[cand[b]]; });
    std::vector<bool> keep(cand.size(), true);
    for (std::size_t oi : order)
    {
        if (!keep[oi])
            continue;
        for (std::size_t k = oi; k-- > 0 && static_cast<double>(cand[oi] - cand[k]) < distance;)
            keep[k] = false;
        for (std::size_t k = oi + 1; k < cand.size() && static_cast<double>(cand[k] - cand[oi]) < distance; ++k)
            keep[k] = false;
    }

    std::vector<double> times;
    for (std::size_t i = 0; i < cand.size(); ++i)
    {
        if (!keep[i])
            continue;
        const std::size_t p = cand[i];
        const double ym = x[p - 1], y0 = x[p], yp = x[p + 1];
        const double denom = ym - 2.0 * y0 + yp;
        const double delta = denom < 0.0 ? std::clamp(0.5 * (ym - yp) / denom, -0.5, 0.5) : 0.0;
        times.push_back(signal.start_time() + (static_cast<double>(p) + delta) / fs);
    }
    return times;
}

inline RespiratoryEstimate intervals_from_peaks(std::span<const double> peak_times)
{
    if (peak_times.size() < 2)
        throw InsufficientPeaks("need at least 2 peaks, got " + std::to_string(peak_times.size()));
    RespiratoryEstimate est;
    est.peak_times.assign(peak_times.begin(), peak_times.end());
    for (std::size_t i = 1; i < peak_times.size(); ++i)
    {
        const double y = peak_times[i] - peak_times[i - 1];
        detail::require(y > 0.0 && std::isfinite(y), "intervals_from_peaks: peak times must be strictly increasing");
        est.intervals.push_back(y);
        est.rates.push_back(60.0 / y);
    }
    return est;
}

// Pairs every reference peak with the nearest unused estimated peak within
// half of the local reference interval (closest pairs first). An interval
// pair is formed for every two consecutive reference peaks that both matched.
inline MatchResult match_intervals(const RespiratoryEstimate &est, const RespiratoryEstimate &ref)
{
    detail::require(!est.peak_times.empty() && ref.peak_times.size() >= 2,
                    "match_intervals: estimate must be non-empty and the reference needs an interval");
    const auto &rp = ref.peak_times;
    const auto &ep = est.peak_times;

    struct Candidate
    {
        double distance;
        std::size_t r, e;
    };
    std::vector<Candidate> cand;
    for (std::size_t i = 0; i < rp.size(); ++i)
    {
        double local;
        if (i == 0)
            local = rp[1] - rp[0];
        else if (i + 1 == rp.size())
            local = rp[i] - rp[i - 1];
        else
            local = 0.5 * (rp[i + 1] - rp[i - 1]);
        const double window = 0.5 * local;
        const auto lo = std::lower_bound(ep.begin(), ep.end(), rp[i] - window);
        for (auto it = lo; it != ep.end() && *it <= rp[i] + window; ++it)
            cand.push_back({std::abs(*it - rp[i]), i, static_cast<std::size_t>(it - ep.begin())});
    }
    std::stable_sort(cand.begin(), cand.end(), [](const Candidate &a, const Candidate &b) { return a.distance < b.distance; });

    constexpr std::size_t none = static_cast<std::size_t>(-1);
    std::vector<std::size_t> match(rp.size(), none);
    std::vector<bool> used(ep.size(), false);
    MatchResult out;
    for (const auto &c : cand)
    {
        if (match[c.r] != none || used[c.e])
            continue;
        match[c.r] = c.e;
        used[c.e] = true;
        ++out.matched_peaks;
    }
    out.unmatched_reference = rp.size() - out.matched_peaks;
    out.unmatched_estimate = ep.size() - out.matched_peaks;
    for (std::size_t i = 0; i + 1 < rp.size(); ++i)
        if (match[i] != none && match[i + 1] != none)
            out.pairs.push_back({ep[match[i + 1]] - ep[match[i]], rp[i + 1] - rp[i]});
    if (out.pairs.empty())
        throw NoMatches("no consecutive reference breaths were matched");
    return out;
}

// eps_RRI = sqrt(mean (yhat - y)^2), eps_RR = mean |60/yhat - 60/y|,
// alpha_RR = share of pairs with |60/yhat - 60/y| < theta (strict).
inline MetricReport compute_metrics(std::span<const IntervalPair> pairs, double theta_rr = 2.0)
{
    detail::require(!pairs.empty(), "compute_metrics: no interval pairs");
    detail::require(theta_rr >= 0.0 && std::isfinite(theta_rr), "compute_metrics: tolerance must be non-negative");
    MetricReport m;
    m.theta_rr = theta_rr;
    m.matched_count = pairs.size();
    double se = 0.0, ae = 0.0;
    std::size_t hits = 0;
    for (const auto &p : pairs)
    {
        detail::require(p.estimate > 0.0 && p.reference > 0.0, "compute_metrics: intervals must be positive");
        se += (p.estimate - p.reference) * (p.estimate - p.reference);
        const double err = std::abs(60.0 / p.estimate - 60.0 / p.reference);
        ae += err;
        if (err < theta_rr)
            ++hits;
    }
    const auto n = static_cast<double>(pairs.size());
    m.rmse_rri = std::sqrt(se / n);
    m.mae_rr = ae / n;
    m.accuracy = static_cast<double>(hits) / n;
    return m;
}

} // namespace radfuse
