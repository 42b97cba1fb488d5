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

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

/// Data-parallel inner loops shared by the channel simulator and the expert MLP.
///
/// Each kernel has a scalar reference and an AVX2 variant. The scalar reference
/// accumulates reductions in the same 4-lane order as the vector code, so every
/// backend returns bit-identical results. The active backend is picked once at
/// startup from CPUID; `IOX_SIMD=scalar` forces the reference path.
namespace iox::simd
{
    enum class Backend
    {
        scalar,
        avx2,
    };

    struct KernelTable
    {
        // sum_i a[i] * b[i]
        double (*dot)(const double *a, const double *b, std::size_t n);
        // y[i] += alpha * x[i]
        void (*axpy)(double alpha, const double *x, double *y, std::size_t n);
        // out[i] = sqrt(re^2 + im^2)
        void (*magnitude)(const std::complex<double> *in, double *out, std::size_t n);
    };

    std::string_view to_string(Backend backend);

    bool backend_available(Backend backend);

    // Throws iox::Error(parameter) when the backend is not available on this CPU.
    const KernelTable &kernels(Backend backend);

    Backend active_backend();

    const KernelTable &active_kernels();

    double dot(std::span<const double> a, std::span<const double> b);

    void axpy(double alpha, std::span<const double> x, std::span<double> y);

    void magnitude(std::span<const std::complex<double>> in, std::span<double> out);

    namespace detail
    {
        extern const KernelTable scalar_table;
#if defined(IOX_HAVE_AVX2)
        extern const KernelTable avx2_table;
#endif
    }
}
