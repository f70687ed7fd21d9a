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

#include <catch2/catch_amalgamated.hpp>

#include "radfuse/dsp.hpp"
#include "radfuse/eig.hpp"
#include "radfuse/fft.hpp"
#include "test_support.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace radfuse;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("series rejects bad construction")
{
    CHECK_THROWS_AS(RealSeries(std::vector<double>{1.0}, 10.0), InvalidInput);
    CHECK_THROWS_AS(RealSeries(std::vector<double>{1.0, 2.0}, 0.0), InvalidInput);
    CHECK_THROWS_AS(RealSeries(std::vector<double>{1.0, NAN}, 10.0), InvalidInput);
    const RealSeries ok(std::vector<double>{1.0, 2.0, 3.0}, 4.0, 1.0);
    CHECK(ok.duration() == 0.75);
    CHECK(ok.time_at(2) == 1.5);
}

TEST_CASE("fft matches a naive DFT at odd, even and prime lengths")
{
    auto g = rft::rng(1);
    for (std::size_t n : {1u, 2u, 7u, 64u, 100u, 127u, 360u})
    {
        std::vector<cplx> x(n);
        for (auto &v : x)
            v = {rft::uniform(g, -1, 1), rft::uniform(g, -1, 1)};
        const auto got = fft::forward(std::span<const cplx>(x));
        const auto want = rft::naive_dft(x);
        for (std::size_t k = 0; k < n; ++k)
            CHECK(std::abs(got[k] - want[k]) < 1e-10 * static_cast<double>(n));
        const auto back = fft::inverse(got);
        for (std::size_t k = 0; k < n; ++k)
            CHECK(std::abs(back[k] - x[k]) < 1e-12);
    }
}

TEST_CASE("hilbert of a cosine is the matching sine")
{
    const double fs = 100.0;
    std::vector<double> c(1000);
    for (std::size_t i = 0; i < c.size(); ++i)
        c[i] = std::cos(2.0 * rft::pi * static_cast<double>(i) / fs);
    const auto a = hilbert(RealSeries(c, fs));
    double worst = 0.0;
    for (std::size_t i = 50; i < 950; ++i)
        worst = std::max(worst, std::abs(a[i].imag() - std::sin(2.0 * rft::pi * static_cast<double>(i) / fs)));
    CHECK(worst < 1e-6);
    for (std::size_t i = 0; i < c.size(); ++i)
        REQUIRE(a[i].real() == c[i]);
}

TEST_CASE("hilbert of a constant has no quadrature")
{
    const auto a = hilbert(RealSeries(std::vector<double>(64, 5.0), 10.0));
    for (std::size_t i = 0; i < 64; ++i)
        CHECK(std::abs(a[i].imag()) < 1e-10);
}

TEST_CASE("hilbert output has no negative-frequency content")
{
    auto g = rft::rng(2);
    for (std::size_t n : {1024u, 1001u})
    {
        const auto a = hilbert(RealSeries(rft::gaussian(n, g), 50.0));
        const auto spec = rft::naive_dft(std::vector<cplx>(a.samples().begin(), a.samples().end()));
        double peak = 0.0;
        for (const auto &v : spec)
            peak = std::max(peak, std::abs(v));
        for (std::size_t k = n / 2 + 1; k < n; ++k)
            CHECK(std::abs(spec[k]) < 1e-9 * peak);
    }
    CHECK_THROWS_AS(hilbert(RealSeries(std::vector<double>{1, 2, 3}, 1.0)), InvalidInput);
}

TEST_CASE("unwrap_phase examples")
{
    const std::vector<double> a{0.0, rft::pi - 0.1, -rft::pi + 0.1};
    const auto u = unwrap_phase(a);
    CHECK_THAT(u[1], WithinAbs(rft::pi - 0.1, 1e-15));
    CHECK_THAT(u[2], WithinAbs(rft::pi + 0.1, 1e-12));

    std::vector<double> ramp, wrapped;
    for (double p = 0.0; p <= 2.0 * rft::pi; p += 0.1)
    {
        ramp.push_back(p);
        wrapped.push_back(std::remainder(p, 2.0 * rft::pi));
    }
    const auto r = unwrap_phase(wrapped);
    for (std::size_t i = 0; i < ramp.size(); ++i)
        CHECK_THAT(r[i], WithinAbs(ramp[i], 1e-12));

    CHECK_THROWS_AS(unwrap_phase(std::vector<double>{}), InvalidInput);
}

TEST_CASE("unwrap_phase property: steps in (-pi, pi], offsets in 2 pi Z")
{
    auto g = rft::rng(3);
    for (int trial = 0; trial < 50; ++trial)
    {
        std::vector<double> phi(500);
        double p = 0.0;
        for (auto &v : phi)
        {
            p += rft::uniform(g, -2.5, 2.5);
            const int jump = static_cast<int>(rft::uniform(g, 0, 10));
            v = p + (jump == 0 ? 2.0 * rft::pi : jump == 1 ? -2.0 * rft::pi : 0.0);
        }
        const auto u = unwrap_phase(phi);
        for (std::size_t i = 1; i < u.size(); ++i)
        {
            const double d = u[i] - u[i - 1];
            REQUIRE(d > -rft::pi);
            REQUIRE(d <= rft::pi + 1e-12);
        }
        for (std::size_t i = 0; i < u.size(); ++i)
        {
            const double turns = (u[i] - phi[i]) / (2.0 * rft::pi);
            REQUIRE(std::abs(turns - std::round(turns)) < 1e-9);
        }
        // idempotent on its own output
        const auto again = unwrap_phase(u);
        for (std::size_t i = 0; i < u.size(); ++i)
            REQUIRE(again[i] == u[i]);
    }
}

namespace
{

// Exhaustive scan of the circular correlation over explicitly zero-padded
// copies, with the documented tie rule.
long brute_lag(const RealSeries &ref, const RealSeries &sig, long max_lag)
{
    const std::size_t len = std::max(ref.size(), sig.size());
    std::vector<double> a(len, 0.0), b(len, 0.0);
    std::copy(ref.samples().begin(), ref.samples().end(), a.begin());
    std::copy(sig.samples().begin(), sig.samples().end(), b.begin());
    long best = 0;
    double best_score = -INFINITY;
    for (long lag = -max_lag; lag <= max_lag; ++lag)
    {
        double s = 0.0;
        for (std::size_t t = 0; t < len; ++t)
            s += a[t] * b[(t + len + static_cast<std::size_t>(lag + static_cast<long>(len))) % len];
        const bool better = s > best_score || (s == best_score && (std::abs(lag) < std::abs(best) ||
                                                                  (std::abs(lag) == std::abs(best) && lag < best)));
        if (better)
        {
            best_score = s;
            best = lag;
        }
    }
    return best;
}

} // namespace

TEST_CASE("xcorr_peak_lag follows the delay convention")
{
    auto g = rft::rng(4);
    const auto base = rft::gaussian(600, g);
    const RealSeries ref(base, 10.0);
    CHECK(xcorr_peak_lag(ref, ref, 100) == 0);

    std::vector<double> delayed(600, 0.0);
    for (std::size_t i = 50; i < 600; ++i)
        delayed[i] = base[i - 50];
    const RealSeries sig(delayed, 10.0);
    CHECK(xcorr_peak_lag(ref, sig, 100) == 50);
    CHECK(brute_lag(ref, sig, 100) == 50);

    const auto s = rft::tone(0.5, 100.0, 20.0);
    CHECK(xcorr_peak_lag(s, s, 40) == 0);

    CHECK_THROWS_AS(xcorr_peak_lag(ref, RealSeries(base, 20.0), 10), InvalidInput);
}

TEST_CASE("xcorr_peak_lag agrees with an exhaustive scan on random inputs")
{
    auto g = rft::rng(5);
    for (int trial = 0; trial < 40; ++trial)
    {
        const auto n = static_cast<std::size_t>(rft::uniform(g, 40, 200));
        const auto n2 = trial % 3 == 0 ? n - static_cast<std::size_t>(rft::uniform(g, 0, 20)) : n;
        const RealSeries a(rft::gaussian(n, g), 1.0), b(rft::gaussian(n2, g), 1.0);
        const auto m = static_cast<long>(rft::uniform(g, 1, static_cast<double>(n2) - 1));
        REQUIRE(xcorr_peak_lag(a, b, static_cast<std::size_t>(m)) == brute_lag(a, b, m));
    }
    // exact ties: all-zero signals prefer lag 0, a symmetric pair prefers the negative lag
    const RealSeries z(std::vector<double>(10, 0.0), 1.0);
    CHECK(xcorr_peak_lag(z, z, 3) == 0);
    const RealSeries r(std::vector<double>{0, 0, 0, 1, 0, 0, 0}, 1.0), s(std::vector<double>{0, 0, 1, 0, 1, 0, 0}, 1.0);
    CHECK(xcorr_peak_lag(r, s, 2) == -1);
    CHECK(brute_lag(r, s, 2) == -1);
}

TEST_CASE("fractional_shift identity, quarter period and index roll")
{
    const double fs = 100.0, f = 0.5;
    const auto x = rft::tone(f, fs, 40.0);
    const auto same = fractional_shift(x, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i)
        REQUIRE(same[i] == x[i]);

    // Delaying sin by a quarter period gives -cos; advancing gives cos.
    const auto adv = fractional_shift(x, -1.0 / (4.0 * f));
    const auto del = fractional_shift(x, 1.0 / (4.0 * f));
    double e_adv = 0.0, e_del = 0.0;
    for (std::size_t i = 200; i + 200 < x.size(); ++i)
    {
        const double c = std::cos(2.0 * rft::pi * f * static_cast<double>(i) / fs);
        e_adv = std::max(e_adv, std::abs(adv[i] - c));
        e_del = std::max(e_del, std::abs(del[i] + c));
    }
    CHECK(e_adv < 1e-6);
    CHECK(e_del < 1e-6);

    // Band-limited periodic content: integer shift equals a circular roll.
    auto g = rft::rng(6);
    const std::size_t n = 512;
    std::vector<double> bl(n, 0.0);
    for (int h = 1; h < 40; ++h)
    {
        const double a = rft::uniform(g, -1, 1), ph = rft::uniform(g, 0, 2 * rft::pi);
        for (std::size_t i = 0; i < n; ++i)
            bl[i] += a * std::cos(2.0 * rft::pi * h * static_cast<double>(i) / static_cast<double>(n) + ph);
    }
    const RealSeries b(bl, 8.0);
    for (long k : {1L, 7L, -13L, 100L})
    {
        const auto shifted = fractional_shift(b, static_cast<double>(k) / 8.0);
        for (std::size_t i = 0; i < n; ++i)
        {
            const std::size_t src = static_cast<std::size_t>((static_cast<long>(i) - k + static_cast<long>(n)) % static_cast<long>(n));
            REQUIRE(std::abs(shifted[i] - bl[src]) < 1e-8);
        }
        const auto back = fractional_shift(shifted, -static_cast<double>(k) / 8.0);
        REQUIRE(rft::max_abs_diff(back.samples(), b.samples()) < 1e-8);
        CHECK(xcorr_peak_lag(b, shifted, static_cast<std::size_t>(std::abs(k) + 5)) == k);
    }
    CHECK_THROWS_AS(fractional_shift(b, b.duration() / 4.0), InvalidInput);
}

TEST_CASE("taylor window")
{
    CHECK(taylor_window(1) == std::vector<double>{1.0});
    // scipy.signal.windows.taylor(12, nbar=4, sll=30, norm=True, sym=True)
    const double ref12[] = {0.2594233849085965, 0.378155355815231,  0.5641031333424653,
                            0.754597728914996,  0.9054538662999985, 0.9890941970644014};
    const auto w = taylor_window(12, 4, -30.0);
    REQUIRE(w.size() == 12);
    for (std::size_t i = 0; i < 6; ++i)
    {
        CHECK_THAT(w[i], WithinAbs(ref12[i], 1e-12));
        CHECK(w[11 - i] == w[i]);
    }
    // scipy.signal.windows.taylor(7, nbar=3, sll=25)
    const double ref7[] = {0.39364966679621394, 0.6341601735082598, 0.8965871498989122, 1.0};
    const auto w7 = taylor_window(7, 3, -25.0);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK_THAT(w7[i], WithinAbs(ref7[i], 1e-12));

    for (std::size_t n = 5; n < 40; ++n)
    {
        const auto v = taylor_window(n, 4, -35.0);
        for (std::size_t i = 0; i < n; ++i)
        {
            REQUIRE(v[i] > 0.0);
            REQUIRE(v[i] <= 1.0 + 1e-12);
            REQUIRE(std::abs(v[i] - v[n - 1 - i]) <= 1e-12);
        }
    }
    CHECK_THROWS_AS(taylor_window(4, 4, -30.0), InvalidInput);
    CHECK_THROWS_AS(taylor_window(8, 4, 10.0), InvalidInput);
}

TEST_CASE("hann window")
{
    const auto w = hann_window(5);
    CHECK(w[0] == 0.0);
    CHECK_THAT(w[1], WithinAbs(0.5, 1e-15));
    CHECK_THAT(w[2], WithinAbs(1.0, 1e-15));
    CHECK(w[3] == w[1]);
}

namespace
{

HermitianMatrix random_hermitian_psd(std::size_t n, std::mt19937_64 &g)
{
    std::vector<cplx> a(n * n);
    for (auto &v : a)
        v = {rft::uniform(g, -1, 1), rft::uniform(g, -1, 1)};
    HermitianMatrix r(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
        {
            cplx s = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                s += a[i * n + k] * std::conj(a[j * n + k]);
            r(i, j) = s;
        }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j)
            r(i, j) = std::conj(r(j, i));
    for (std::size_t i = 0; i < n; ++i)
        r(i, i) = r(i, i).real();
    return r;
}

} // namespace

TEST_CASE("hermitian_eig small examples")
{
    HermitianMatrix id(3);
    for (std::size_t i = 0; i < 3; ++i)
        id(i, i) = 1.0;
    const auto e = hermitian_eig(id);
    for (double v : e.values)
        CHECK_THAT(v, WithinAbs(1.0, 1e-15));

    HermitianMatrix d(2);
    d(0, 0) = 1.0;
    d(1, 1) = 3.0;
    const auto e2 = hermitian_eig(d);
    CHECK_THAT(e2.values[0], WithinAbs(3.0, 1e-15));
    CHECK_THAT(e2.values[1], WithinAbs(1.0, 1e-15));
    CHECK(std::abs(e2.vectors[0][0]) < 1e-15);
    CHECK_THAT(e2.vectors[0][1].real(), WithinAbs(1.0, 1e-15));

    HermitianMatrix bad(2);
    bad(0, 1) = 1.0;
    CHECK_THROWS_AS(hermitian_eig(bad), InvalidInput);
}

TEST_CASE("hermitian_eig agrees with Eigen and satisfies its residual contract")
{
    auto g = rft::rng(7);
    for (std::size_t n : {1u, 2u, 3u, 4u, 6u, 8u, 16u})
    {
        for (int trial = 0; trial < 10; ++trial)
        {
            const auto r = random_hermitian_psd(n, g);
            const auto e = hermitian_eig(r);
            const double norm = r.frobenius_norm();

            Eigen::MatrixXcd m(n, n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r(i, j);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> oracle(m);
            for (std::size_t i = 0; i < n; ++i)
                REQUIRE(std::abs(e.values[i] - oracle.eigenvalues()(static_cast<Eigen::Index>(n - 1 - i))) < 1e-10 * norm);

            for (std::size_t i = 0; i + 1 < n; ++i)
                REQUIRE(e.values[i] >= e.values[i + 1]);
            double trace = 0.0;
            for (double v : e.values)
                trace += v;
            REQUIRE(std::abs(trace - r.trace()) < 1e-10 * norm);

            Eigen::MatrixXcd v(n, n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    v(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = e.vectors[i][j];
            const Eigen::MatrixXcd gram = v.adjoint() * v;
            REQUIRE((gram - Eigen::MatrixXcd::Identity(n, n)).norm() < 1e-9);
            Eigen::VectorXd s(n);
            for (std::size_t i = 0; i < n; ++i)
                s(static_cast<Eigen::Index>(i)) = e.values[i];
            REQUIRE((v * s.asDiagonal() * v.adjoint() - m).norm() < 1e-8 * norm);
            for (std::size_t i = 0; i < n; ++i)
            {
                const Eigen::VectorXcd col = v.col(static_cast<Eigen::Index>(i));
                REQUIRE((m * col - e.values[i] * col).norm() < 1e-9 * norm);
                // phase rule: the first largest-magnitude entry is real and non-negative
                Eigen::Index arg = 0;
                col.cwiseAbs().maxCoeff(&arg);
                REQUIRE(col(arg).real() >= 0.0);
                REQUIRE(std::abs(col(arg).imag()) < 1e-12);
            }
        }
    }
}

TEST_CASE("hermitian_eig on real symmetric input returns real vectors")
{
    auto g = rft::rng(8);
    HermitianMatrix r(5);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = i; j < 5; ++j)
            r(i, j) = r(j, i) = rft::uniform(g, -1, 1);
    const auto e = hermitian_eig(r);
    for (const auto &vec : e.vectors)
        for (const auto &x : vec)
            REQUIRE(x.imag() == 0.0);
}
