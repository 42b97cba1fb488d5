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

#include "iox/channel_sim.hpp"

#include "iox/error.hpp"
#include "iox/random.hpp"
#include "iox/simd/kernels.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

namespace iox::channel
{
    namespace
    {
        constexpr double kTwoPi = 2.0 * std::numbers::pi;

        // FFTW planning is not thread-safe; execution on a private plan is.
        std::mutex &fftw_planner_mutex()
        {
            static std::mutex m;
            return m;
        }

        void check_n(int n)
        {
            if (n < 1)
                fail(ErrorKind::parameter, "n must be >= 1, got " + std::to_string(n));
        }

        void check_doppler(double doppler_norm)
        {
            if (!std::isfinite(doppler_norm) || doppler_norm < 0.0 || doppler_norm >= 0.5)
                fail(ErrorKind::parameter, "doppler_norm must be in [0, 0.5), got " + std::to_string(doppler_norm));
        }

        void check_k(double k_factor)
        {
            if (!std::isfinite(k_factor) || k_factor < 0.0)
                fail(ErrorKind::parameter, "k_factor must be finite and >= 0, got " + std::to_string(k_factor));
        }

        // DTFT of `h` at normalized frequency f.
        std::complex<double> dtft(const std::vector<std::complex<double>> &h, double f)
        {
            std::complex<double> acc{0.0, 0.0};
            for (std::size_t t = 0; t < h.size(); ++t)
                acc += h[t] * std::polar(1.0, -kTwoPi * f * static_cast<double>(t));
            return acc;
        }

        double dominant_line_frequency(const std::vector<std::complex<double>> &h)
        {
            std::size_t size = 1;
            while (size < 4 * h.size())
                size <<= 1;

            std::vector<std::complex<double>> buffer(size, {0.0, 0.0});
            std::copy(h.begin(), h.end(), buffer.begin());
            auto *io = reinterpret_cast<fftw_complex *>(buffer.data());

            fftw_plan plan;
            {
                std::lock_guard lock(fftw_planner_mutex());
                plan = fftw_plan_dft_1d(static_cast<int>(size), io, io, FFTW_FORWARD, FFTW_ESTIMATE);
            }
            fftw_execute(plan);
            {
                std::lock_guard lock(fftw_planner_mutex());
                fftw_destroy_plan(plan);
            }

            std::size_t peak = 0;
            double best = -1.0;
            for (std::size_t k = 0; k < size; ++k)
            {
                const double p = std::norm(buffer[k]);
                if (p > best)
                {
                    best = p;
                    peak = k;
                }
            }
            double f_peak = static_cast<double>(peak) / static_cast<double>(size);
            if (f_peak >= 0.5)
                f_peak -= 1.0;

            // Golden-section refinement of |DTFT| within one bin either side.
            const double bin = 1.0 / static_cast<double>(size);
            double lo = f_peak - bin, hi = f_peak + bin;
            const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
            double x1 = hi - ratio * (hi - lo), x2 = lo + ratio * (hi - lo);
            double p1 = std::norm(dtft(h, x1)), p2 = std::norm(dtft(h, x2));
            for (int iter = 0; iter < 40; ++iter)
            {
                if (p1 > p2)
                {
                    hi = x2;
                    x2 = x1;
                    p2 = p1;
                    x1 = hi - ratio * (hi - lo);
                    p1 = std::norm(dtft(h, x1));
                }
                else
                {
                    lo = x1;
                    x1 = x2;
                    p1 = p2;
                    x2 = lo + ratio * (hi - lo);
                    p2 = std::norm(dtft(h, x2));
                }
            }
            const double refined = 0.5 * (lo + hi);
            return std::norm(dtft(h, refined)) >= best ? refined : f_peak;
        }
    }

    const std::vector<std::string> &supported_attributes()
    {
        static const std::vector<std::string> ids = {
            std::string(kDetectLos),
            std::string(kDetectHighDoppler),
            std::string(kDetectRayleigh),
            std::string(kDetectRicianK10),
        };
        return ids;
    }

    void validate(const SceneSpec &spec)
    {
        check_n(spec.n);
        check_doppler(spec.doppler_norm);
        check_k(spec.k_factor);
    }

    void validate(const ComplexSeries &series)
    {
        if (series.samples.empty())
            fail(ErrorKind::parameter, "complex series is empty");
        for (const auto &s : series.samples)
            if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
                fail(ErrorKind::parameter, "complex series contains a non-finite sample");
    }

    ComplexSeries gen_rayleigh(int n, double doppler_norm, std::uint64_t seed)
    {
        check_n(n);
        check_doppler(doppler_norm);

        Rng rng(seed);
        // Stratified arrival angles with one random offset; independent phases.
        const double offset = kTwoPi * rng.uniform();
        double freq[kSinusoids];
        double phase[kSinusoids];
        for (int i = 0; i < kSinusoids; ++i)
        {
            const double angle = (kTwoPi * (i + 1) - std::numbers::pi + offset) / kSinusoids;
            freq[i] = kTwoPi * doppler_norm * std::cos(angle);
            phase[i] = kTwoPi * rng.uniform();
        }

        const double scale = 1.0 / std::sqrt(static_cast<double>(kSinusoids));
        ComplexSeries out;
        out.samples.resize(static_cast<std::size_t>(n));
        for (int t = 0; t < n; ++t)
        {
            double re = 0.0, im = 0.0;
            for (int i = 0; i < kSinusoids; ++i)
            {
                const double arg = freq[i] * t + phase[i];
                re += std::cos(arg);
                im += std::sin(arg);
            }
            out.samples[static_cast<std::size_t>(t)] = {re * scale, im * scale};
        }
        return out;
    }

    ComplexSeries gen_rician(int n, double k_factor, double doppler_norm, std::uint64_t seed)
    {
        check_k(k_factor);
        ComplexSeries scattered = gen_rayleigh(n, doppler_norm, seed);
        if (k_factor == 0.0)
            return scattered;

        // LoS draws come from a stream separate from the scattering draws.
        Rng rng(mix_seed(seed, 0x4c6f53));
        const double los_freq = kTwoPi * doppler_norm * std::cos(kTwoPi * rng.uniform());
        const double los_phase = kTwoPi * rng.uniform();

        const double los_amp = std::sqrt(k_factor / (k_factor + 1.0));
        const double nlos_amp = std::sqrt(1.0 / (k_factor + 1.0));
        for (int t = 0; t < n; ++t)
        {
            auto &s = scattered.samples[static_cast<std::size_t>(t)];
            s = los_amp * std::polar(1.0, los_freq * t + los_phase) + nlos_amp * s;
        }
        return scattered;
    }

    FeatureVector magnitude_features(const ComplexSeries &series)
    {
        validate(series);
        FeatureVector fv;
        fv.values.resize(series.size());
        simd::magnitude(series.samples, fv.values);
        return fv;
    }

    AttributeLabels label_scene(const SceneSpec &spec, const std::vector<std::string> &attribute_set)
    {
        AttributeLabels labels;
        for (const auto &id : attribute_set)
        {
            int y;
            if (id == kDetectLos)
                y = spec.k_factor >= kLosMinK;
            else if (id == kDetectHighDoppler)
                y = spec.doppler_norm >= kHighDopplerMin;
            else if (id == kDetectRayleigh)
                y = spec.k_factor == 0.0;
            else if (id == kDetectRicianK10)
                y = spec.k_factor >= kRicianK10Min && spec.k_factor <= kRicianK10Max;
            else
                fail(ErrorKind::unsupported_attribute, "unsupported attribute: " + id);
            labels[id] = y;
        }
        return labels;
    }

    Scene synth_scene(const SceneSpec &spec, const std::vector<std::string> &attribute_set)
    {
        validate(spec);
        Scene scene;
        scene.labels = label_scene(spec, attribute_set);
        scene.features = magnitude_features(gen_rician(spec.n, spec.k_factor, spec.doppler_norm, spec.seed));
        scene.spec = spec;
        return scene;
    }

    double estimate_k_factor(const ComplexSeries &series)
    {
        if (series.size() < 100)
            fail(ErrorKind::insufficient_data,
                 "estimate_k_factor needs at least 100 samples, got " + std::to_string(series.size()));
        validate(series);

        const auto &h = series.samples;
        const double count = static_cast<double>(h.size());
        const double f_line = dominant_line_frequency(h);
        const std::complex<double> line = dtft(h, f_line) / count;

        const double line_power = std::norm(line);
        double residual = 0.0;
        for (std::size_t t = 0; t < h.size(); ++t)
            residual += std::norm(h[t] - line * std::polar(1.0, kTwoPi * f_line * static_cast<double>(t)));
        residual /= count;

        if (line_power < 1e-12)
            return 0.0;
        if (residual <= line_power / kKFactorCap)
            return kKFactorCap;
        return line_power / residual;
    }

    std::complex<double> autocorrelation(const ComplexSeries &series, int lag)
    {
        validate(series);
        const auto n = static_cast<int>(series.size());
        if (lag < 0 || lag >= n)
            fail(ErrorKind::parameter, "lag must be in [0, n), got " + std::to_string(lag));
        if (lag == 0)
            return {1.0, 0.0};

        const auto &h = series.samples;
        std::complex<double> r0{0.0, 0.0}, rl{0.0, 0.0};
        for (int t = 0; t < n; ++t)
            r0 += std::norm(h[static_cast<std::size_t>(t)]);
        for (int t = 0; t + lag < n; ++t)
            rl += h[static_cast<std::size_t>(t + lag)] * std::conj(h[static_cast<std::size_t>(t)]);
        if (r0.real() == 0.0)
            return {0.0, 0.0};
        return rl / r0.real();
    }

    std::vector<SceneSpec> sample_specs(const SceneSampler &sampler, std::size_t count, std::uint64_t seed)
    {
        if (sampler.k_values.empty())
            fail(ErrorKind::parameter, "scene sampler needs at least one k value");
        if (!(sampler.doppler_min > 0.0) || sampler.doppler_max < sampler.doppler_min)
            fail(ErrorKind::parameter, "scene sampler doppler range must satisfy 0 < min <= max");
        check_doppler(sampler.doppler_max);
        check_n(sampler.n);
        for (double k : sampler.k_values)
            check_k(k);

        Rng rng(seed);
        const double log_lo = std::log(sampler.doppler_min);
        const double log_hi = std::log(sampler.doppler_max);
        std::vector<SceneSpec> specs;
        specs.reserve(count);
        for (std::size_t i = 0; i < count; ++i)
        {
            SceneSpec spec;
            spec.k_factor = sampler.k_values[rng.below(sampler.k_values.size())];
            spec.doppler_norm = std::exp(rng.uniform(log_lo, log_hi));
            spec.seed = mix_seed(seed, i);
            spec.n = sampler.n;
            specs.push_back(spec);
        }
        return specs;
    }

    std::vector<Scene> synth_pool(const SceneSampler &sampler, std::size_t count, std::uint64_t seed,
                                  const std::vector<std::string> &attribute_set)
    {
        std::vector<Scene> pool;
        pool.reserve(count);
        for (const auto &spec : sample_specs(sampler, count, seed))
            pool.push_back(synth_scene(spec, attribute_set));
        return pool;
    }
}
