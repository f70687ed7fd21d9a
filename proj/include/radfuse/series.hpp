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

#include "radfuse/error.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace radfuse
{

using cplx = std::complex<double>;

namespace detail
{
template <typename T>
bool all_finite(const std::vector<T> &v)
{
    for (const auto &x : v)
    {
        if constexpr (std::is_floating_point_v<T>)
        {
            if (!std::isfinite(x))
                return false;
        }
        else
        {
            if (!std::isfinite(x.real()) || !std::isfinite(x.imag()))
                return false;
        }
    }
    return true;
}

template <typename T>
void check_series(const std::vector<T> &samples, double sample_rate, const char *what)
{
    require(samples.size() >= 2, std::string(what) + ": at least 2 samples required");
    require(std::isfinite(sample_rate) && sample_rate > 0.0, std::string(what) + ": sample rate must be positive");
    require(all_finite(samples), std::string(what) + ": non-finite sample");
}
} // namespace detail

// Uniformly sampled time series. Invariants (checked on construction):
// length >= 2, sample_rate > 0, all samples finite.
template <typename T>
class BasicSeries
{
public:
    using value_type = T;

    BasicSeries(std::vector<T> samples, double sample_rate, double start_time = 0.0)
        : samples_(std::move(samples)), sample_rate_(sample_rate), start_time_(start_time)
    {
        detail::check_series(samples_, sample_rate_, "series");
        detail::require(std::isfinite(start_time_), "series: start time must be finite");
    }

    std::span<const T> samples() const noexcept { return samples_; }
    const std::vector<T> &values() const noexcept { return samples_; }
    std::vector<T> release() && { return std::move(samples_); }

    std::size_t size() const noexcept { return samples_.size(); }
    const T &operator[](std::size_t i) const { return samples_[i]; }

    double sample_rate() const noexcept { return sample_rate_; }
    double start_time() const noexcept { return start_time_; }
    double duration() const noexcept { return static_cast<double>(samples_.size()) / sample_rate_; }
    double time_at(std::size_t i) const noexcept { return start_time_ + static_cast<double>(i) / sample_rate_; }

    // Same grid, new samples.
    BasicSeries with_samples(std::vector<T> samples) const
    {
        detail::require(samples.size() == samples_.size(), "series: length mismatch");
        return BasicSeries(std::move(samples), sample_rate_, start_time_);
    }

private:
    std::vector<T> samples_;
    double sample_rate_;
    double start_time_;
};

using RealSeries = BasicSeries<double>;
using ComplexSeries = BasicSeries<cplx>;

enum class SpectrumLayout
{
    OneSided, // bins 0..n-1 map to frequencies 0, d, 2d, ...
    TwoSided, // standard DFT ordering: non-negative bins first, then negative
};

// Discrete spectrum on a uniform angular-frequency grid.
struct Spectrum
{
    std::vector<cplx> bins;
    double bin_spacing = 1.0; // angular frequency per bin
    SpectrumLayout layout = SpectrumLayout::OneSided;

    std::size_t size() const noexcept { return bins.size(); }

    double frequency(std::size_t i) const noexcept
    {
        if (layout == SpectrumLayout::OneSided)
            return static_cast<double>(i) * bin_spacing;
        const auto n = bins.size();
        const auto k = static_cast<double>(i);
        return (i <= n / 2) ? k * bin_spacing : (k - static_cast<double>(n)) * bin_spacing;
    }

    bool same_grid(const Spectrum &other) const noexcept
    {
        return bins.size() == other.bins.size() && layout == other.layout && bin_spacing == other.bin_spacing;
    }
};

// Dense square complex matrix meant to hold Hermitian data. Symmetry is not
// enforced here; the eigensolver validates it.
class HermitianMatrix
{
public:
    explicit HermitianMatrix(std::size_t dimension) : n_(dimension), entries_(dimension * dimension) {}

    HermitianMatrix(std::size_t dimension, std::vector<cplx> row_major)
        : n_(dimension), entries_(std::move(row_major))
    {
        detail::require(entries_.size() == n_ * n_, "HermitianMatrix: entry count must be dimension^2");
    }

    std::size_t dimension() const noexcept { return n_; }
    cplx &operator()(std::size_t i, std::size_t j) { return entries_[i * n_ + j]; }
    const cplx &operator()(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }
    std::span<const cplx> entries() const noexcept { return entries_; }

    double frobenius_norm() const
    {
        double s = 0.0;
        for (const auto &e : entries_)
            s += std::norm(e);
        return std::sqrt(s);
    }

    double trace() const
    {
        double t = 0.0;
        for (std::size_t i = 0; i < n_; ++i)
            t += entries_[i * n_ + i].real();
        return t;
    }

    // max |a_ij - conj(a_ji)|
    double asymmetry() const
    {
        double worst = 0.0;
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = i; j < n_; ++j)
                worst = std::max(worst, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
        return worst;
    }

private:
    std::size_t n_;
    std::vector<cplx> entries_;
};

} // namespace radfuse
