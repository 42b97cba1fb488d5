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

// Compiled with -mavx2 only. FMA is deliberately not enabled: the scalar
// reference rounds the product and the sum separately.

#include "iox/simd/kernels.hpp"

#include <cmath>
#include <immintrin.h>

namespace
{
    double dot_avx2(const double *a, const double *b, std::size_t n)
    {
        __m256d acc = _mm256_setzero_pd();
        std::size_t i = 0;
        for (; i + 4 <= n; i += 4)
        {
            const __m256d va = _mm256_loadu_pd(a + i);
            const __m256d vb = _mm256_loadu_pd(b + i);
            acc = _mm256_add_pd(acc, _mm256_mul_pd(va, vb));
        }
        const __m128d lo = _mm256_castpd256_pd128(acc);
        const __m128d hi = _mm256_extractf128_pd(acc, 1);
        const __m128d pair = _mm_add_pd(lo, hi);
        double sum = _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
        for (; i < n; ++i)
        {
            const double prod = a[i] * b[i];
            sum = sum + prod;
        }
        return sum;
    }

    void axpy_avx2(double alpha, const double *x, double *y, std::size_t n)
    {
        const __m256d va = _mm256_set1_pd(alpha);
        std::size_t i = 0;
        for (; i + 4 <= n; i += 4)
        {
            const __m256d vx = _mm256_loadu_pd(x + i);
            const __m256d vy = _mm256_loadu_pd(y + i);
            _mm256_storeu_pd(y + i, _mm256_add_pd(vy, _mm256_mul_pd(va, vx)));
        }
        for (; i < n; ++i)
        {
            const double prod = alpha * x[i];
            y[i] = y[i] + prod;
        }
    }

    void magnitude_avx2(const std::complex<double> *in, double *out, std::size_t n)
    {
        // std::complex<double> is layout-compatible with double[2].
        const double *raw = reinterpret_cast<const double *>(in);
        std::size_t i = 0;
        for (; i + 4 <= n; i += 4)
        {
            const __m256d v0 = _mm256_loadu_pd(raw + 2 * i);     // r0 i0 r1 i1
            const __m256d v1 = _mm256_loadu_pd(raw + 2 * i + 4); // r2 i2 r3 i3
            const __m256d sq0 = _mm256_mul_pd(v0, v0);
            const __m256d sq1 = _mm256_mul_pd(v1, v1);
            // hadd gives r0+i0, r2+i2, r1+i1, r3+i3; permute back to sample order.
            const __m256d sums = _mm256_hadd_pd(sq0, sq1);
            const __m256d ordered = _mm256_permute4x64_pd(sums, _MM_SHUFFLE(3, 1, 2, 0));
            _mm256_storeu_pd(out + i, _mm256_sqrt_pd(ordered));
        }
        for (; i < n; ++i)
        {
            const double re = in[i].real();
            const double im = in[i].imag();
            const double re2 = re * re;
            const double im2 = im * im;
            out[i] = std::sqrt(re2 + im2);
        }
    }
}

const iox::simd::KernelTable iox::simd::detail::avx2_table = {
    &dot_avx2,
    &axpy_avx2,
    &magnitude_avx2,
};
