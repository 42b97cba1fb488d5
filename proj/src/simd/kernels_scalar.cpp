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

#include "iox/simd/kernels.hpp"

#include <cmath>

namespace
{
    double dot_scalar(const double *a, const double *b, std::size_t n)
    {
        double acc[4] = {0.0, 0.0, 0.0, 0.0};
        std::size_t i = 0;
        for (; i + 4 <= n; i += 4)
        {
            for (std::size_t lane = 0; lane < 4; ++lane)
            {
                const double prod = a[i + lane] * b[i + lane];
                acc[lane] = acc[lane] + prod;
            }
        }
        // Matches the AVX2 horizontal reduction: low half + high half, then pairwise.
        double sum = (acc[0] + acc[2]) + (acc[1] + acc[3]);
        for (; i < n; ++i)
        {
            const double prod = a[i] * b[i];
            sum = sum + prod;
        }
        return sum;
    }

    void axpy_scalar(double alpha, const double *x, double *y, std::size_t n)
    {
        for (std::size_t i = 0; i < n; ++i)
        {
            const double prod = alpha * x[i];
            y[i] = y[i] + prod;
        }
    }

    void magnitude_scalar(const std::complex<double> *in, double *out, std::size_t n)
    {
        for (std::size_t i = 0; i < n; ++i)
        {
            const double re = in[i].real();
            const double im = in[i].imag();
            const double re2 = re * re;
            const double im2 = im * im;
            out[i] = std::sqrt(re2 + im2);
        }
    }
}

const iox::simd::KernelTable iox::simd::detail::scalar_table = {
    &dot_scalar,
    &axpy_scalar,
    &magnitude_scalar,
};
