// SPDX-License-Identifier: Apache-2.0
//
// iox - wireless Internet-of-Experts over a JSON-RPC tool layer
// Copyright (C) 2026 The iox authors
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

#include "iox/simd/kernels.hpp"

#include <cmath>
#include <complex>
#include <random>
#include <vector>

using namespace iox::simd;

namespace
{
    std::vector<double> random_vector(std::size_t n, std::mt19937_64 &gen)
    {
        std::uniform_real_distribution<double> dist(-3.0, 3.0);
        std::vector<double> v(n);
        for (auto &x : v)
            x = dist(gen);
        return v;
    }

    std::vector<std::complex<double>> random_complex(std::size_t n, std::mt19937_64 &gen)
    {
        std::normal_distribution<double> dist;
        std::vector<std::complex<double>> v(n);
        for (auto &x : v)
            x = {dist(gen), dist(gen)};
        return v;
    }
}

TEST_CASE("SIMD - scalar reference agrees with naive loops")
{
    std::mt19937_64 gen(11);
    const auto &k = kernels(Backend::scalar);
    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 64u, 101u})
    {
        const auto a = random_vector(n, gen), b = random_vector(n, gen);
        double naive = 0.0, mass = 0.0;
        for (std::size_t i = 0; i < n; ++i)
        {
            naive += a[i] * b[i];
            mass += std::abs(a[i] * b[i]);
        }
        CHECK(std::abs(k.dot(a.data(), b.data(), n) - naive) <= 1e-14 * (mass + 1.0));

        auto y = random_vector(n, gen);
        auto expect = y;
        for (std::size_t i = 0; i < n; ++i)
            expect[i] += 0.75 * a[i];
        k.axpy(0.75, a.data(), y.data(), n);
        CHECK(y == expect);

        const auto c = random_complex(n, gen);
        std::vector<double> mag(n);
        k.magnitude(c.data(), mag.data(), n);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(mag[i] == std::sqrt(c[i].real() * c[i].real() + c[i].imag() * c[i].imag()));
    }
}

TEST_CASE("SIMD - AVX2 is bit-identical to scalar")
{
    if (!backend_available(Backend::avx2))
        SKIP("AVX2 not available on this CPU");
    const auto &s = kernels(Backend::scalar);
    const auto &v = kernels(Backend::avx2);
    std::mt19937_64 gen(12);
    for (std::size_t n = 0; n <= 70; ++n)
    {
        const auto a = random_vector(n, gen), b = random_vector(n, gen);
        REQUIRE(s.dot(a.data(), b.data(), n) == v.dot(a.data(), b.data(), n));

        auto y1 = random_vector(n, gen);
        auto y2 = y1;
        s.axpy(-1.3, a.data(), y1.data(), n);
        v.axpy(-1.3, a.data(), y2.data(), n);
        REQUIRE(y1 == y2);

        const auto c = random_complex(n, gen);
        std::vector<double> m1(n), m2(n);
        s.magnitude(c.data(), m1.data(), n);
        v.magnitude(c.data(), m2.data(), n);
        REQUIRE(m1 == m2);
    }
}

TEST_CASE("SIMD - unaligned offsets")
{
    if (!backend_available(Backend::avx2))
        SKIP("AVX2 not available on this CPU");
    std::mt19937_64 gen(13);
    const auto a = random_vector(80, gen), b = random_vector(80, gen);
    for (std::size_t off = 0; off < 4; ++off)
        CHECK(kernels(Backend::scalar).dot(a.data() + off, b.data() + off, 67) ==
              kernels(Backend::avx2).dot(a.data() + off, b.data() + off, 67));
}

TEST_CASE("SIMD - span wrappers use the active backend")
{
    const std::vector<double> a = {1, 2, 3, 4, 5}, b = {5, 4, 3, 2, 1};
    CHECK(dot(a, b) == 35.0);
    std::vector<double> y = {1, 1, 1, 1, 1};
    axpy(2.0, a, y);
    CHECK(y == std::vector<double>{3, 5, 7, 9, 11});
    const std::vector<std::complex<double>> c = {{3, 4}, {0, -2}};
    std::vector<double> m(2);
    magnitude(c, m);
    CHECK(m == std::vector<double>{5, 2});
    CHECK(backend_available(Backend::scalar));
    CHECK(backend_available(active_backend()));
    CHECK_THROWS(dot(a, std::vector<double>{1.0}));
}
