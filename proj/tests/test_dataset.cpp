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

#include "support.hpp"

#include "iox/dataset.hpp"

#include <set>

using namespace iox::dataset;
using iox::channel::supported_attributes;
using iox::channel::synth_scene;
using test_support::kind_of;
using test_support::TempDir;

namespace
{
    // `pos` Rayleigh scenes and `neg` Rician K=5 scenes, n = 8.
    std::vector<Scene> rayleigh_pool(int pos, int neg)
    {
        std::vector<Scene> pool;
        for (int i = 0; i < pos + neg; ++i)
            pool.push_back(synth_scene({i < pos ? 0.0 : 5.0, 0.05, static_cast<std::uint64_t>(i), 8},
                                       {"detect_rayleigh"}));
        return pool;
    }

    AttributeDataset tiny(int count)
    {
        return build_attribute_dataset("detect_rayleigh", rayleigh_pool(count, count), static_cast<std::size_t>(count),
                                       3);
    }
}

TEST_CASE("build_attribute_dataset - balance and sampling")
{
    const auto all = build_attribute_dataset("detect_rayleigh", rayleigh_pool(50, 50), 100, 1);
    CHECK(all.size() == 100);
    CHECK(all.positive_rate() == 0.5);
    std::set<std::uint64_t> seeds;
    for (const auto &ex : all.examples)
        seeds.insert(ex.scene.seed);
    CHECK(seeds.size() == 100);

    const auto odd = build_attribute_dataset("detect_rayleigh", rayleigh_pool(50, 50), 7, 1);
    CHECK(odd.positives() == 4);
    CHECK(odd == build_attribute_dataset("detect_rayleigh", rayleigh_pool(50, 50), 7, 1));
    CHECK(odd != build_attribute_dataset("detect_rayleigh", rayleigh_pool(50, 50), 7, 2));

    CHECK(kind_of([] { build_attribute_dataset("detect_rayleigh", rayleigh_pool(10, 90), 100, 1); }) ==
          iox::ErrorKind::pool_exhausted);
    CHECK_THAT(test_support::message_of([] { build_attribute_dataset("detect_rayleigh", rayleigh_pool(10, 90), 100, 1); }),
               Catch::Matchers::ContainsSubstring("positives"));
    CHECK_THAT(test_support::message_of([] { build_attribute_dataset("detect_rayleigh", rayleigh_pool(90, 10), 100, 1); }),
               Catch::Matchers::ContainsSubstring("negatives"));
    CHECK(kind_of([] { build_attribute_dataset("detect_los", rayleigh_pool(5, 5), 4, 1); }) ==
          iox::ErrorKind::unsupported_attribute);
}

TEST_CASE("build_attribute_dataset - large pool matches labeling rules")
{
    iox::channel::SceneSampler sampler;
    sampler.n = 8;
    const auto pool = iox::channel::synth_pool(sampler, 10000, 5, supported_attributes());
    const auto ds = build_attribute_dataset("detect_rayleigh", pool, 4000, 9);
    std::size_t k0 = 0, kpos = 0;
    for (const auto &ex : ds.examples)
    {
        (ex.scene.k_factor == 0.0 ? k0 : kpos)++;
        CHECK(iox::channel::label_scene(ex.scene, {"detect_rayleigh"}).at("detect_rayleigh") == ex.label);
    }
    CHECK(k0 == 2000);
    CHECK(kpos == 2000);
    for (const auto &attr : supported_attributes())
    {
        const auto d = build_attribute_dataset(attr, pool, 1000, 1);
        CHECK(d.positive_rate() >= 0.49);
        CHECK(d.positive_rate() <= 0.51);
    }
}

TEST_CASE("split - stratified, disjoint, reproducible")
{
    const auto ds = tiny(100);
    const auto parts = split(ds, 0.2, 4);
    CHECK(parts.train.size() == 80);
    CHECK(parts.test.size() == 20);
    CHECK(parts.train.positives() == 40);
    CHECK(parts.test.positives() == 10);
    CHECK(parts.warnings.empty());
    CHECK(parts.train.split_tag == SplitTag::train);
    CHECK(parts.test.split_tag == SplitTag::test);

    std::set<std::uint64_t> train_seeds;
    for (const auto &ex : parts.train.examples)
        train_seeds.insert(ex.scene.seed);
    for (const auto &ex : parts.test.examples)
        CHECK(train_seeds.count(ex.scene.seed) == 0);

    const auto again = split(ds, 0.2, 4);
    CHECK(again.train == parts.train);
    CHECK(again.test == parts.test);

    CHECK(kind_of([&] { split(ds, 0.0, 1); }) == iox::ErrorKind::parameter);
    CHECK(kind_of([&] { split(ds, 1.0, 1); }) == iox::ErrorKind::parameter);
}

TEST_CASE("split - two examples at one half")
{
    const auto ds = tiny(2);
    REQUIRE(ds.positives() == 1);
    const auto parts = split(ds, 0.5, 1);
    CHECK(parts.train.size() == 1);
    CHECK(parts.test.size() == 1);
    CHECK(parts.train.positives() + parts.test.positives() == 1);
    CHECK_FALSE(parts.warnings.empty());

    AttributeDataset one = ds;
    one.examples.resize(1);
    CHECK(kind_of([&] { split(one, 0.5, 1); }) == iox::ErrorKind::parameter);
}

TEST_CASE("save_dataset / load_dataset - round trip and exact layout")
{
    TempDir dir;
    const auto ds = tiny(3);
    save_dataset(ds, dir / "d.jsonl");
    CHECK(load_dataset(dir / "d.jsonl") == ds);

    const std::string text = test_support::read_file(dir / "d.jsonl");
    CHECK(text.rfind("{\"attribute_id\": \"detect_rayleigh\", \"n\": 8, \"count\": 3}\n", 0) == 0);
    const auto second = text.substr(text.find('\n') + 1);
    CHECK(second.rfind("{\"h\": [", 0) == 0);
    CHECK(second.find("], \"y\": ") != std::string::npos);
    CHECK(second.find(", \"scene\": {\"k_factor\": ") != std::string::npos);

    const auto parts = split(tiny(10), 0.2, 1);
    save_dataset(parts.test, dir / "t.jsonl");
    CHECK(load_dataset(dir / "t.jsonl") == parts.test);
    CHECK(dataset_file_name("detect_los") == "detect_los.jsonl");
}

TEST_CASE("load_dataset - schema and format errors")
{
    TempDir dir;
    const std::string header = "{\"attribute_id\": \"detect_los\", \"n\": 64, \"count\": 1}\n";
    std::string h63 = "[";
    for (int i = 0; i < 63; ++i)
        h63 += (i ? ", " : "") + std::string("0.5");
    h63 += "]";
    test_support::write_file(dir / "short.jsonl",
                             header + "{\"h\": " + h63 +
                                 ", \"y\": 1, \"scene\": {\"k_factor\": 2, \"doppler_norm\": 0.1, \"seed\": 3}}\n");
    CHECK(kind_of([&] { load_dataset(dir / "short.jsonl"); }) == iox::ErrorKind::schema);

    const auto ds = tiny(3);
    save_dataset(ds, dir / "full.jsonl");
    std::string text = test_support::read_file(dir / "full.jsonl");
    text.resize(text.size() - 20);
    test_support::write_file(dir / "cut.jsonl", text);
    CHECK(kind_of([&] { load_dataset(dir / "cut.jsonl"); }) == iox::ErrorKind::format);
    CHECK_THAT(test_support::message_of([&] { load_dataset(dir / "cut.jsonl"); }),
               Catch::Matchers::ContainsSubstring("line 4"));

    CHECK(kind_of([&] { load_dataset(dir / "missing.jsonl"); }) == iox::ErrorKind::io);
    test_support::write_file(dir / "hdr.jsonl", "{\"n\": 64}\n");
    CHECK(kind_of([&] { load_dataset(dir / "hdr.jsonl"); }) == iox::ErrorKind::format);
}
