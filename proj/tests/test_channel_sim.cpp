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

#include "oracles.hpp"
#include "support.hpp"

#include "iox/channel_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace iox::channel;
using test_support::kind_of;

namespace
{
    using oracle::bessel_j0;
    using oracle::ks_pvalue;
    using oracle::ks_statistic_rayleigh;

    double mean_power(const ComplexSeries &s)
    {
        double p = 0.0;
        for (const auto &v : s.samples)
            p += std::norm(v);
        return p / static_cast<double>(s.size());
    }

    double j0_rmse(const ComplexSeries &s, double doppler)
    {
        double se = 0.0;
        for (int lag = 0; lag <= 20; ++lag)
        {
            const double e = autocorrelation(s, lag).real() - bessel_j0(2.0 * std::numbers::pi * doppler * lag);
            se += e * e;
        }
        return std::sqrt(se / 21.0);
    }
}

TEST_CASE("Oracles - J0 series matches tabulated values")
{
    CHECK(bessel_j0(0.0) == 1.0);
    CHECK(bessel_j0(1.0) == Catch::Approx(0.7651976865579666).epsilon(1e-14));
    CHECK(bessel_j0(2.404825557695773) == Catch::Approx(0.0).margin(1e-13));
    CHECK(bessel_j0(2.0 * std::numbers::pi * 0.01 * 10) == Catch::Approx(0.9037).margin(1e-4));
    CHECK(bessel_j0(5.0) == Catch::Approx(std::cyl_bessel_j(0.0, 5.0)).epsilon(1e-12));
}

TEST_CASE("Oracles - KS p-value on exact quantiles and a shifted sample")
{
    std::vector<double> exact;
    for (int i = 0; i < 1000; ++i)
        exact.push_back(std::sqrt(-std::log(1.0 - (i + 0.5) / 1000.0)));
    CHECK(ks_pvalue(ks_statistic_rayleigh(exact), exact.size()) > 0.99);
    for (auto &x : exact)
        x *= 1.1;
    CHECK(ks_pvalue(ks_statistic_rayleigh(exact), exact.size()) < 0.01);
}

TEST_CASE("gen_rayleigh - power, distribution and Doppler spectrum")
{
    const auto s = gen_rayleigh(10000, 0.05, 7);
    REQUIRE(s.size() == 10000);
    CHECK(mean_power(s) >= 0.95);
    CHECK(mean_power(s) <= 1.05);

    const auto mags = magnitude_features(s).values;
    CHECK(ks_pvalue(ks_statistic_rayleigh(mags), mags.size()) > 0.01);

    const auto slow = gen_rayleigh(10000, 0.01, 3);
    CHECK(std::abs(autocorrelation(slow, 10).real() - bessel_j0(2.0 * std::numbers::pi * 0.1)) <= 0.05);

    for (double doppler : {0.01, 0.05})
        for (std::uint64_t seed : {1u, 2u, 3u, 7u})
            CHECK(j0_rmse(gen_rayleigh(10000, doppler, seed), doppler) <= 0.05);
}

TEST_CASE("gen_rayleigh - marginal across independent seeds is Rayleigh")
{
    std::vector<double> first;
    for (std::uint64_t seed = 0; seed < 10000; ++seed)
        first.push_back(std::abs(gen_rayleigh(1, 0.0, seed).samples[0]));
    CHECK(ks_pvalue(ks_statistic_rayleigh(first), first.size()) > 0.01);
}

TEST_CASE("gen_rayleigh - single draw is zero mean over seeds")
{
    std::complex<double> acc{};
    const int seeds = 20000;
    for (int s = 0; s < seeds; ++s)
        acc += gen_rayleigh(1, 0.0, static_cast<std::uint64_t>(s)).samples[0];
    CHECK(std::abs(acc / static_cast<double>(seeds)) < 0.03);
}

TEST_CASE("gen_rician - construction and K recovery")
{
    const auto r0 = gen_rician(256, 0.0, 0.03, 5);
    CHECK(r0.samples == gen_rayleigh(256, 0.03, 5).samples);

    for (double k : {0.0, 2.0, 5.0, 10.0})
    {
        const double p = mean_power(gen_rician(10000, k, 0.05, 21));
        CHECK(p >= 0.9);
        CHECK(p <= 1.1);
    }

    const double k10 = estimate_k_factor(gen_rician(10000, 10.0, 0.02, 11));
    CHECK(k10 >= 8.0);
    CHECK(k10 <= 12.0);
    for (double k : {5.0, 10.0})
        for (std::uint64_t seed : {1u, 2u, 3u})
        {
            const double est = estimate_k_factor(gen_rician(10000, k, 0.05, seed));
            CHECK(est >= 0.8 * k);
            CHECK(est <= 1.2 * k);
        }

    for (const auto &v : gen_rician(500, 1e6, 0.1, 4).samples)
        CHECK(std::abs(std::abs(v) - 1.0) < 1e-2);

    CHECK(kind_of([] { gen_rician(10, -1.0, 0.1, 1); }) == iox::ErrorKind::parameter);
    CHECK(kind_of([] { gen_rayleigh(0, 0.1, 1); }) == iox::ErrorKind::parameter);
    CHECK(kind_of([] { gen_rayleigh(8, 0.5, 1); }) == iox::ErrorKind::parameter);
    CHECK(kind_of([] { gen_rayleigh(8, -0.01, 1); }) == iox::ErrorKind::parameter);
}

TEST_CASE("estimate_k_factor - limits and preconditions")
{
    ComplexSeries constant;
    constant.samples.assign(1000, {1.0, 0.0});
    CHECK(estimate_k_factor(constant) == kKFactorCap);
    CHECK(estimate_k_factor(gen_rayleigh(10000, 0.05, 9)) < 0.2);

    ComplexSeries short_series;
    short_series.samples.assign(99, {1.0, 0.0});
    CHECK(kind_of([&] { estimate_k_factor(short_series); }) == iox::ErrorKind::insufficient_data);
}

TEST_CASE("magnitude_features - modulus per sample")
{
    CHECK(magnitude_features({{{3.0, 4.0}}}).values == std::vector<double>{5.0});
    CHECK(magnitude_features({{{0.0, 0.0}, {1.0, 0.0}}}).values == std::vector<double>{0.0, 1.0});
    const auto f = magnitude_features(gen_rician(64, 2.0, 0.1, 3));
    REQUIRE(f.size() == 64);
    CHECK(std::all_of(f.values.begin(), f.values.end(), [](double v) { return v >= 0.0 && std::isfinite(v); }));
    CHECK(kind_of([] { magnitude_features({}); }) == iox::ErrorKind::parameter);
    ComplexSeries bad{{{std::nan(""), 0.0}}};
    CHECK(kind_of([&] { magnitude_features(bad); }) == iox::ErrorKind::parameter);
}

TEST_CASE("autocorrelation - normalization and white noise")
{
    const auto s = gen_rayleigh(300, 0.2, 2);
    CHECK(autocorrelation(s, 0) == std::complex<double>(1.0, 0.0));

    // Independent draws across seeds form a white sequence.
    ComplexSeries white;
    for (std::uint64_t seed = 0; seed < 10000; ++seed)
        white.samples.push_back(gen_rayleigh(1, 0.0, seed + 100000).samples[0]);
    CHECK(std::abs(autocorrelation(white, 50)) < 0.05);

    CHECK(kind_of([&] { autocorrelation(s, 300); }) == iox::ErrorKind::parameter);
    CHECK(kind_of([&] { autocorrelation(s, -1); }) == iox::ErrorKind::parameter);
}

TEST_CASE("label_scene - rules and inclusive boundaries")
{
    const auto &all = supported_attributes();
    REQUIRE(all.size() == 4);
    CHECK(label_scene({10.0, 0.1, 0}, all) ==
          AttributeLabels{{"detect_los", 1}, {"detect_high_doppler", 1}, {"detect_rayleigh", 0}, {"detect_rician_k10", 1}});
    CHECK(label_scene({0.0, 0.001, 0}, all) ==
          AttributeLabels{{"detect_los", 0}, {"detect_high_doppler", 0}, {"detect_rayleigh", 1}, {"detect_rician_k10", 0}});
    const auto edge = label_scene({2.0, 0.05, 0}, all);
    CHECK(edge.at("detect_los") == 1);
    CHECK(edge.at("detect_high_doppler") == 1);
    CHECK(label_scene({8.0, 0.0, 0}, {"detect_rician_k10"}).at("detect_rician_k10") == 1);
    CHECK(label_scene({12.0, 0.0, 0}, {"detect_rician_k10"}).at("detect_rician_k10") == 1);
    CHECK(label_scene({12.5, 0.0, 0}, {"detect_rician_k10"}).at("detect_rician_k10") == 0);
    CHECK(label_scene({1.0, 0.0, 0}, {"detect_los"}).size() == 1);
    CHECK(kind_of([&] { label_scene({1.0, 0.0, 0}, {"detect_snow"}); }) == iox::ErrorKind::unsupported_attribute);
}

TEST_CASE("synth_scene - determinism and sampler coverage")
{
    const SceneSpec spec{5.0, 0.02, 1234, 64};
    const auto a = synth_scene(spec, supported_attributes());
    const auto b = synth_scene(spec, supported_attributes());
    CHECK(a == b);
    CHECK(a.features.size() == 64);
    CHECK(a.spec == spec);

    const auto pool = synth_pool(SceneSampler{}, 1000, 99, supported_attributes());
    for (const auto &attr : supported_attributes())
    {
        double pos = 0.0;
        for (const auto &scene : pool)
            pos += scene.labels.at(attr);
        CHECK(pos / 1000.0 >= 0.2);
        CHECK(pos / 1000.0 <= 0.8);
    }

    const auto specs = sample_specs(SceneSampler{}, 500, 4);
    for (std::size_t i = 1; i < specs.size(); ++i)
        CHECK(specs[i].seed != specs[i - 1].seed);
    for (const auto &s : specs)
    {
        CHECK(s.doppler_norm >= 1e-3);
        CHECK(s.doppler_norm <= 0.2);
    }
    CHECK(kind_of([] { synth_scene({1.0, 0.7, 0, 64}, supported_attributes()); }) == iox::ErrorKind::parameter);
}
