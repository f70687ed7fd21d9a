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
#include "radfuse/series.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

namespace radfuse
{

struct HermitianEigen
{
    std::vector<double> values;            // descending
    std::vector<std::vector<cplx>> vectors; // vectors[i] pairs with values[i]; orthonormal
};

// Eigendecomposition of a small Hermitian matrix by cyclic Jacobi rotations.
//
// Output is deterministic: eigenvalues are sorted descending (stable on ties)
// and each eigenvector is rotated by a unit phase so that its first
// largest-magnitude entry is real and non-negative. For real symmetric input
// that phase is a sign, and the vectors stay real.
inline HermitianEigen hermitian_eig(const HermitianMatrix &r)
{
    const std::size_t n = r.dimension();
    detail::require(n >= 1 && n <= 64, "hermitian_eig: dimension must be in [1, 64]");
    const double scale = r.frobenius_norm();
    for (const auto &e : r.entries())
        detail::require(std::isfinite(e.real()) && std::isfinite(e.imag()), "hermitian_eig: non-finite entry");
    detail::require(r.asymmetry() <= 1e-8 * std::max(scale, std::numeric_limits<double>::min()),
                    "hermitian_eig: matrix is not Hermitian");

    // Work on a copy symmetrized from the upper triangle.
    std::vector<cplx> a(n * n);
    auto A = [&](std::size_t i, std::size_t j) -> cplx & { return a[i * n + j]; };
    for (std::size_t i = 0; i < n; ++i)
    {
        A(i, i) = r(i, i).real();
        for (std::size_t j = i + 1; j < n; ++j)
        {
            A(i, j) = r(i, j);
            A(j, i) = std::conj(r(i, j));
        }
    }
    std::vector<cplx> v(n * n, 0.0);
    auto V = [&](std::size_t i, std::size_t j) -> cplx & { return v[i * n + j]; };
    for (std::size_t i = 0; i < n; ++i)
        V(i, i) = 1.0;

    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                s += 2.0 * std::norm(A(i, j));
        return std::sqrt(s);
    };

    const double threshold = 1e-15 * scale;
    for (int sweep = 0; sweep < 100 && off_norm() > threshold; ++sweep)
    {
        for (std::size_t p = 0; p + 1 < n; ++p)
        {
            for (std::size_t q = p + 1; q < n; ++q)
            {
                const double mag = std::abs(A(p, q));
                if (mag <= std::numeric_limits<double>::min())
                    continue;
                // Phase-rotate q so the pivot is real, then apply a real Givens
                // rotation: U = diag-phase * G, A <- U^H A U.
                const cplx phase = std::conj(A(p, q)) / mag; // e^{-i phi}
                const double app = A(p, p).real();
                const double aqq = A(q, q).real();
                const double theta = (aqq - app) / (2.0 * mag);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                // U columns: u_p = c e_p - s e^{-i phi} e_q ; u_q = s e_p + c e^{-i phi} e_q
                const cplx upp = c, uqp = -s * phase, upq = s, uqq = c * phase;
                for (std::size_t k = 0; k < n; ++k) // A <- A U
                {
                    const cplx akp = A(k, p), akq = A(k, q);
                    A(k, p) = akp * upp + akq * uqp;
                    A(k, q) = akp * upq + akq * uqq;
                }
                for (std::size_t k = 0; k < n; ++k) // A <- U^H A
                {
                    const cplx apk = A(p, k), aqk = A(q, k);
                    A(p, k) = std::conj(upp) * apk + std::conj(uqp) * aqk;
                    A(q, k) = std::conj(upq) * apk + std::conj(uqq) * aqk;
                }
                A(p, q) = 0.0;
                A(q, p) = 0.0;
                A(p, p) = A(p, p).real();
                A(q, q) = A(q, q).real();
                for (std::size_t k = 0; k < n; ++k) // V <- V U
                {
                    const cplx vkp = V(k, p), vkq = V(k, q);
                    V(k, p) = vkp * upp + vkq * uqp;
                    V(k, q) = vkp * upq + vkq * uqq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return A(i, i).real() > A(j, j).real(); });

    HermitianEigen out;
    out.values.reserve(n);
    out.vectors.reserve(n);
    for (std::size_t idx : order)
    {
        out.values.push_back(A(idx, idx).real());
        std::vector<cplx> vec(n);
        for (std::size_t k = 0; k < n; ++k)
            vec[k] = V(k, idx);

        double biggest = 0.0;
        for (const auto &x : vec)
            biggest = std::max(biggest, std::abs(x));
        std::size_t lead = 0;
        while (std::abs(vec[lead]) < biggest * (1.0 - 1e-12))
            ++lead;
        const cplx unit = std::conj(vec[lead]) / std::abs(vec[lead]);
        for (auto &x : vec)
            x *= unit;
        vec[lead] = std::abs(vec[lead]);
        out.vectors.push_back(std::move(vec));
    }
    return out;
}

} // namespace radfuse
