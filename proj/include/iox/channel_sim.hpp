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
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

/// Synthetic fading channel observations and the estimators used to validate them.
///
/// Scattering is a sum-of-sinusoids (Jakes-type) process; a line-of-sight
/// component with its own Doppler phase ramp is mixed in at the requested
/// Rician K-factor. Everything is a pure function of its arguments and seed.
namespace iox::channel
{
    inline constexpr int kDefaultFeatureDim = 64;
    inline constexpr int kSinusoids = 32;
    inline constexpr double kKFactorCap = 1.0e6;

    inline constexpr std::string_view kDetectLos = "detect_los";
    inline constexpr std::string_view kDetectHighDoppler = "detect_high_doppler";
    inline constexpr std::string_view kDetectRayleigh = "detect_rayleigh";
    inline constexpr std::string_view kDetectRicianK10 = "detect_rician_k10";

    // Labeling thresholds; all boundaries inclusive.
    inline constexpr double kLosMinK = 2.0;
    inline constexpr double kHighDopplerMin = 0.05;
    inline constexpr double kRicianK10Min = 8.0;
    inline constexpr double kRicianK10Max = 12.0;

    const std::vector<std::string> &supported_attributes();

    struct ComplexSeries
    {
        std::vector<std::complex<double>> samples;
        double sample_interval = 1.0; // seconds per sample

        std::size_t size() const { return samples.size(); }
    };

    struct FeatureVector
    {
        std::vector<double> values;

        std::size_t size() const { return values.size(); }
        bool operator==(const FeatureVector &) const = default;
    };

    struct SceneSpec
    {
        double k_factor = 0.0;     // linear LoS-to-scattered power ratio
        double doppler_norm = 0.0; // max Doppler frequency x sample interval
        std::uint64_t seed = 0;
        int n = kDefaultFeatureDim;

        bool operator==(const SceneSpec &) const = default;
    };

    using AttributeLabels = std::map<std::string, int>;

    struct Scene
    {
        FeatureVector features;
        AttributeLabels labels;
        SceneSpec spec;

        bool operator==(const Scene &) const = default;
    };

    // Throws parameter errors for n < 1, doppler outside [0, 0.5), negative or non-finite K.
    void validate(const SceneSpec &spec);

    // Throws parameter errors on empty or non-finite series.
    void validate(const ComplexSeries &series);

    ComplexSeries gen_rayleigh(int n, double doppler_norm, std::uint64_t seed);

    // h = sqrt(K/(K+1)) e^{j phi(t)} + sqrt(1/(K+1)) s(t). With K = 0 the result
    // is bit-identical to gen_rayleigh for the same (n, doppler_norm, seed).
    ComplexSeries gen_rician(int n, double k_factor, double doppler_norm, std::uint64_t seed);

    FeatureVector magnitude_features(const ComplexSeries &series);

    AttributeLabels label_scene(const SceneSpec &spec, const std::vector<std::string> &attribute_set);

    Scene synth_scene(const SceneSpec &spec, const std::vector<std::string> &attribute_set);

    // Moment-method K estimate: coherent line power over residual scattered power.
    // The line is taken at the dominant spectral frequency, so a LoS term with a
    // Doppler phase ramp is handled the same as a static one. Returns 0 below the
    // numerical floor and kKFactorCap when the residual vanishes.
    double estimate_k_factor(const ComplexSeries &series);

    // Biased sample autocorrelation at `lag`, normalized by the lag-0 value.
    std::complex<double> autocorrelation(const ComplexSeries &series, int lag);

    /// Scene distribution used for dataset pools and the end-to-end experiment.
    struct SceneSampler
    {
        std::vector<double> k_values = {0.0, 2.0, 5.0, 10.0};
        double doppler_min = 1.0e-3; // log-uniform lower bound
        double doppler_max = 0.2;
        int n = kDefaultFeatureDim;

        bool operator==(const SceneSampler &) const = default;
    };

    // Scene seeds are mix_seed(seed, index): distinct across the returned specs.
    std::vector<SceneSpec> sample_specs(const SceneSampler &sampler, std::size_t count, std::uint64_t seed);

    std::vector<Scene> synth_pool(const SceneSampler &sampler, std::size_t count, std::uint64_t seed,
                                  const std::vector<std::string> &attribute_set);
}
