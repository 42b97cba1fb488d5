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

#include "iox/error.hpp"
#include "iox/simd/kernels.hpp"

#include <cstdlib>
#include <string>

namespace iox::simd
{
    std::string_view to_string(Backend backend)
    {
        switch (backend)
        {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
        }
        return "unknown";
    }

    bool backend_available(Backend backend)
    {
        switch (backend)
        {
        case Backend::scalar:
            return true;
        case Backend::avx2:
#if defined(IOX_HAVE_AVX2)
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
        }
        return false;
    }

    const KernelTable &kernels(Backend backend)
    {
        if (!backend_available(backend))
            fail(ErrorKind::parameter, "SIMD backend not available: " + std::string(to_string(backend)));
#if defined(IOX_HAVE_AVX2)
        if (backend == Backend::avx2)
            return detail::avx2_table;
#endif
        return detail::scalar_table;
    }

    namespace
    {
        Backend select_backend()
        {
            if (const char *forced = std::getenv("IOX_SIMD"))
            {
                const std::string_view name(forced);
                if (name == "scalar")
                    return Backend::scalar;
                if (name == "avx2" && backend_available(Backend::avx2))
                    return Backend::avx2;
            }
            return backend_available(Backend::avx2) ? Backend::avx2 : Backend::scalar;
        }
    }

    Backend active_backend()
    {
        static const Backend selected = select_backend();
        return selected;
    }

    const KernelTable &active_kernels()
    {
        static const KernelTable &table = kernels(active_backend());
        return table;
    }

    double dot(std::span<const double> a, std::span<const double> b)
    {
        if (a.size() != b.size())
            fail(ErrorKind::shape, "dot: length mismatch");
        return active_kernels().dot(a.data(), b.data(), a.size());
    }

    void axpy(double alpha, std::span<const double> x, std::span<double> y)
    {
        if (x.size() != y.size())
            fail(ErrorKind::shape, "axpy: length mismatch");
        active_kernels().axpy(alpha, x.data(), y.data(), x.size());
    }

    void magnitude(std::span<const std::complex<double>> in, std::span<double> out)
    {
        if (in.size() != out.size())
            fail(ErrorKind::shape, "magnitude: length mismatch");
        active_kernels().magnitude(in.data(), out.data(), in.size());
    }
}
