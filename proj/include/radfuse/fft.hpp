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

// Thin RAII wrapper around FFTW. Plans are created with FFTW_ESTIMATE and
// FFTW_UNALIGNED so the same plan (and therefore bit-identical output) is used
// regardless of buffer alignment. FFTW's planner is not re-entrant, so plan
// creation and destruction are serialized; execution is thread-safe.

#include "radfuse/error.hpp"
#include "radfuse/series.hpp"

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <mutex>
#include <span>
#include <vector>

namespace radfuse::fft
{

enum class Direction
{
    Forward,
    Inverse,
};

namespace detail
{
inline std::mutex &planner_mutex()
{
    static std::mutex m;
    return m;
}

inline fftw_complex *as_fftw(cplx *p) { return reinterpret_cast<fftw_complex *>(p); }
inline fftw_complex *as_fftw(const cplx *p) { return reinterpret_cast<fftw_complex *>(const_cast<cplx *>(p)); }
} // namespace detail

// A batch of `count` transforms of length `n`. Transform j reads
// in[j*dist + i*stride] and writes out[j*dist + i*stride].
class Plan
{
public:
    Plan(std::size_t n, Direction dir, std::size_t count = 1, std::size_t stride = 1, std::size_t dist = 0)
        : n_(n), count_(count), stride_(stride), dist_(dist == 0 ? n : dist)
    {
        radfuse::detail::require(n > 0 && count > 0 && stride > 0, "fft: empty transform");
        std::vector<cplx> a(span_length()), b(span_length());
        const int len = static_cast<int>(n);
        const int sign = dir == Direction::Forward ? FFTW_FORWARD : FFTW_BACKWARD;
        std::lock_guard lock(detail::planner_mutex());
        plan_ = fftw_plan_many_dft(1, &len, static_cast<int>(count_), detail::as_fftw(a.data()), nullptr,
                                   static_cast<int>(stride_), static_cast<int>(dist_), detail::as_fftw(b.data()),
                                   nullptr, static_cast<int>(stride_), static_cast<int>(dist_), sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED | FFTW_PRESERVE_INPUT);
        if (plan_ == nullptr)
            throw Error("fft: FFTW failed to create a plan");
    }

    Plan(const Plan &) = delete;
    Plan &operator=(const Plan &) = delete;

    ~Plan()
    {
        std::lock_guard lock(detail::planner_mutex());
        fftw_destroy_plan(plan_);
    }

    std::size_t span_length() const noexcept { return (count_ - 1) * dist_ + (n_ - 1) * stride_ + 1; }

    // Out-of-place execution. Unnormalized in both directions.
    void execute(std::span<const cplx> in, std::span<cplx> out) const
    {
        radfuse::detail::require(in.size() >= span_length() && out.size() >= span_length(), "fft: buffer too small");
        radfuse::detail::require(in.data() != out.data(), "fft: in-place execution not supported");
        fftw_execute_dft(plan_, detail::as_fftw(in.data()), detail::as_fftw(out.data()));
    }

private:
    std::size_t n_;
    std::size_t count_;
    std::size_t stride_;
    std::size_t dist_;
    fftw_plan plan_ = nullptr;
};

inline std::vector<cplx> forward(std::span<const cplx> x)
{
    std::vector<cplx> out(x.size());
    Plan(x.size(), Direction::Forward).execute(x, out);
    return out;
}

inline std::vector<cplx> forward(std::span<const double> x)
{
    std::vector<cplx> in(x.begin(), x.end());
    return forward(std::span<const cplx>(in));
}

// Normalized inverse: inverse(forward(x)) == x up to round-off.
inline std::vector<cplx> inverse(std::span<const cplx> X)
{
    std::vector<cplx> out(X.size());
    Plan(X.size(), Direction::Inverse).execute(X, out);
    const double scale = 1.0 / static_cast<double>(X.size());
    for (auto &v : out)
        v *= scale;
    return out;
}

// Angular frequency (rad per unit time at `sample_rate`) of DFT bin k for length n.
inline double bin_frequency(std::size_t k, std::size_t n, double sample_rate)
{
    const double kk = (k <= n / 2) ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n);
    return 2.0 * M_PI * sample_rate * kk / static_cast<double>(n);
}

} // namespace radfuse::fft
