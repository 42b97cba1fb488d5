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

#include "iox/dataset.hpp"

#include "iox/error.hpp"
#include "iox/format.hpp"
#include "iox/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace iox::dataset
{
    using nlohmann::json;

    std::size_t AttributeDataset::positives() const
    {
        return static_cast<std::size_t>(std::count_if(examples.begin(), examples.end(),
                                                       [](const LabeledExample &e) { return e.label == 1; }));
    }

    double AttributeDataset::positive_rate() const
    {
        if (examples.empty())
            return 0.0;
        return static_cast<double>(positives()) / static_cast<double>(examples.size());
    }

    int AttributeDataset::feature_dim() const
    {
        if (examples.empty())
            fail(ErrorKind::shape, "dataset '" + attribute_id + "' is empty");
        const std::size_t n = examples.front().features.size();
        for (const auto &e : examples)
            if (e.features.size() != n)
                fail(ErrorKind::shape, "dataset '" + attribute_id + "' has inconsistent feature lengths");
        return static_cast<int>(n);
    }

    AttributeDataset build_attribute_dataset(const std::string &attribute_id, const std::vector<Scene> &pool,
                                             std::size_t target_size, std::uint64_t seed)
    {
        if (target_size == 0)
            fail(ErrorKind::parameter, "target_size must be >= 1");

        std::vector<std::size_t> pos, neg;
        for (std::size_t i = 0; i < pool.size(); ++i)
        {
            const auto it = pool[i].labels.find(attribute_id);
            if (it == pool[i].labels.end())
                fail(ErrorKind::unsupported_attribute,
                     "pool scene " + std::to_string(i) + " carries no label for '" + attribute_id + "'");
            (it->second == 1 ? pos : neg).push_back(i);
        }

        const std::size_t need_pos = (target_size + 1) / 2;
        const std::size_t need_neg = target_size / 2;
        if (pos.size() < need_pos)
            fail(ErrorKind::pool_exhausted, "pool exhausted for '" + attribute_id + "': need " +
                                                std::to_string(need_pos) + " positives, have " +
                                                std::to_string(pos.size()));
        if (neg.size() < need_neg)
            fail(ErrorKind::pool_exhausted, "pool exhausted for '" + attribute_id + "': need " +
                                                std::to_string(need_neg) + " negatives, have " +
                                                std::to_string(neg.size()));

        Rng rng(seed);
        // Partial Fisher-Yates: the first `k` entries become a uniform sample without replacement.
        auto draw = [&rng](std::vector<std::size_t> &idx, std::size_t k) {
            for (std::size_t i = 0; i < k; ++i)
                std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
            idx.resize(k);
        };
        draw(pos, need_pos);
        draw(neg, need_neg);

        std::vector<std::size_t> chosen;
        chosen.reserve(target_size);
        chosen.insert(chosen.end(), pos.begin(), pos.end());
        chosen.insert(chosen.end(), neg.begin(), neg.end());
        rng.shuffle(chosen);

        AttributeDataset out;
        out.attribute_id = attribute_id;
        out.examples.reserve(target_size);
        for (std::size_t i : chosen)
            out.examples.push_back({pool[i].features, pool[i].labels.at(attribute_id), pool[i].spec});
        return out;
    }

    SplitResult split(const AttributeDataset &dataset, double test_fraction, std::uint64_t seed)
    {
        if (!(test_fraction > 0.0 && test_fraction < 1.0))
            fail(ErrorKind::parameter, "test_fraction must be in (0, 1)");
        const std::size_t total = dataset.size();
        if (total < 2)
            fail(ErrorKind::parameter, "cannot split fewer than 2 examples into non-empty parts");

        std::size_t test_total = static_cast<std::size_t>(std::llround(static_cast<double>(total) * test_fraction));
        test_total = std::clamp<std::size_t>(test_total, 1, total - 1);

        // Class 1 first so ties in the remainder go to positives.
        std::vector<std::size_t> by_class[2];
        for (std::size_t i = 0; i < total; ++i)
            by_class[dataset.examples[i].label == 1 ? 0 : 1].push_back(i);

        std::size_t quota[2];
        double remainder[2];
        std::size_t assigned = 0;
        for (int c = 0; c < 2; ++c)
        {
            const double exact = static_cast<double>(test_total) * static_cast<double>(by_class[c].size()) /
                                 static_cast<double>(total);
            quota[c] = static_cast<std::size_t>(std::floor(exact));
            remainder[c] = exact - static_cast<double>(quota[c]);
            assigned += quota[c];
        }
        while (assigned < test_total)
        {
            int c = remainder[0] >= remainder[1] ? 0 : 1;
            if (quota[c] >= by_class[c].size())
                c = 1 - c;
            ++quota[c];
            remainder[c] = -1.0;
            ++assigned;
        }

        Rng rng(seed);
        SplitResult result;
        result.train.attribute_id = result.test.attribute_id = dataset.attribute_id;
        result.train.split_tag = SplitTag::train;
        result.test.split_tag = SplitTag::test;
        std::vector<std::size_t> test_idx, train_idx;
        for (int c = 0; c < 2; ++c)
        {
            auto idx = by_class[c];
            rng.shuffle(idx);
            test_idx.insert(test_idx.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(quota[c]));
            train_idx.insert(train_idx.end(), idx.begin() + static_cast<std::ptrdiff_t>(quota[c]), idx.end());
        }
        // Keep the source order inside each split.
        std::sort(test_idx.begin(), test_idx.end());
        std::sort(train_idx.begin(), train_idx.end());
        for (std::size_t i : train_idx)
            result.train.examples.push_back(dataset.examples[i]);
        for (std::size_t i : test_idx)
            result.test.examples.push_back(dataset.examples[i]);

        const std::size_t dataset_pos = dataset.positives();
        const bool has_both = dataset_pos > 0 && dataset_pos < total;
        auto check = [&](const AttributeDataset &part, const char *name) {
            const std::size_t p = part.positives();
            if (has_both && (p == 0 || p == part.size()))
                result.warnings.push_back(std::string("balance warning: ") + name + " split of '" +
                                          dataset.attribute_id + "' contains a single class");
        };
        check(result.train, "train");
        check(result.test, "test");
        return result;
    }

    std::string dataset_file_name(const std::string &attribute_id)
    {
        return attribute_id + ".jsonl";
    }

    namespace
    {
        std::string json_string(const std::string &s)
        {
            return json(s).dump();
        }

        const char *split_name(SplitTag tag)
        {
            return tag == SplitTag::train ? "train" : "test";
        }

        [[noreturn]] void format_error(const std::filesystem::path &path, std::size_t line, const std::string &what)
        {
            fail(ErrorKind::format, path.string() + ": line " + std::to_string(line) + ": " + what);
        }
    }

    void save_dataset(const AttributeDataset &dataset, const std::filesystem::path &path)
    {
        const int n = dataset.examples.empty() ? 0 : dataset.feature_dim();

        std::string out;
        out += "{\"attribute_id\": " + json_string(dataset.attribute_id) + ", \"n\": " + std::to_string(n) +
               ", \"count\": " + std::to_string(dataset.size());
        if (dataset.split_tag)
            out += std::string(", \"split\": \"") + split_name(*dataset.split_tag) + "\"";
        out += "}\n";

        for (const auto &e : dataset.examples)
        {
            out += "{\"h\": [";
            for (std::size_t i = 0; i < e.features.values.size(); ++i)
            {
                if (i)
                    out += ',';
                out += format_double(e.features.values[i]);
            }
            out += "], \"y\": " + std::to_string(e.label) + ", \"scene\": {\"k_factor\": " +
                   format_double(e.scene.k_factor) + ", \"doppler_norm\": " + format_double(e.scene.doppler_norm) +
                   ", \"seed\": " + format_uint(e.scene.seed) + "}}\n";
        }

        std::ofstream file(path, std::ios::binary | std::ios::trunc);
        if (!file)
            fail(ErrorKind::io, "cannot open for writing: " + path.string());
        file << out;
        if (!file)
            fail(ErrorKind::io, "write failed: " + path.string());
    }

    AttributeDataset load_dataset(const std::filesystem::path &path)
    {
        std::ifstream file(path, std::ios::binary);
        if (!file)
            fail(ErrorKind::io, "cannot open for reading: " + path.string());

        std::vector<std::string> lines;
        for (std::string line; std::getline(file, line);)
            lines.push_back(std::move(line));
        if (lines.empty())
            format_error(path, 1, "missing header");

        auto parse_line = [&](std::size_t idx) {
            try
            {
                return json::parse(lines[idx]);
            }
            catch (const json::parse_error &e)
            {
                format_error(path, idx + 1, std::string("malformed record: ") + e.what());
            }
        };

        AttributeDataset ds;
        int n = 0;
        std::size_t count = 0;
        {
            const json header = parse_line(0);
            if (!header.is_object() || !header.contains("attribute_id") || !header["attribute_id"].is_string() ||
                !header.contains("n") || !header["n"].is_number_integer() || !header.contains("count") ||
                !header["count"].is_number_integer())
                format_error(path, 1, "header must carry string attribute_id and integer n, count");
            ds.attribute_id = header["attribute_id"].get<std::string>();
            n = header["n"].get<int>();
            if (header["count"].get<long long>() < 0)
                format_error(path, 1, "negative count");
            count = header["count"].get<std::size_t>();
            if (header.contains("split"))
            {
                const auto tag = header["split"];
                if (tag == "train")
                    ds.split_tag = SplitTag::train;
                else if (tag == "test")
                    ds.split_tag = SplitTag::test;
                else
                    format_error(path, 1, "split must be \"train\" or \"test\"");
            }
        }

        if (lines.size() - 1 < count)
            format_error(path, lines.size() + 1, "expected " + std::to_string(count) + " records, found " +
                                                     std::to_string(lines.size() - 1));
        for (std::size_t i = count + 1; i < lines.size(); ++i)
            if (!lines[i].empty())
                format_error(path, i + 1, "unexpected record beyond declared count");

        ds.examples.reserve(count);
        for (std::size_t i = 1; i <= count; ++i)
        {
            const json rec = parse_line(i);
            if (!rec.is_object() || !rec.contains("h") || !rec["h"].is_array() || !rec.contains("y") ||
                !rec["y"].is_number_integer() || !rec.contains("scene") || !rec["scene"].is_object())
                format_error(path, i + 1, "record must carry array h, integer y, object scene");
            const auto &scene = rec["scene"];
            if (!scene.contains("k_factor") || !scene["k_factor"].is_number() || !scene.contains("doppler_norm") ||
                !scene["doppler_norm"].is_number() || !scene.contains("seed") || !scene["seed"].is_number_unsigned())
                format_error(path, i + 1, "scene must carry numeric k_factor, doppler_norm and unsigned seed");

            LabeledExample ex;
            ex.label = rec["y"].get<int>();
            if (ex.label != 0 && ex.label != 1)
                format_error(path, i + 1, "y must be 0 or 1");
            for (const auto &v : rec["h"])
            {
                if (!v.is_number())
                    format_error(path, i + 1, "h must contain only numbers");
                ex.features.values.push_back(v.get<double>());
            }
            if (static_cast<int>(ex.features.size()) != n)
                fail(ErrorKind::schema, path.string() + ": line " + std::to_string(i + 1) + ": feature length " +
                                            std::to_string(ex.features.size()) + " does not match header n=" +
                                            std::to_string(n));
            ex.scene.k_factor = scene["k_factor"].get<double>();
            ex.scene.doppler_norm = scene["doppler_norm"].get<double>();
            ex.scene.seed = scene["seed"].get<std::uint64_t>();
            ex.scene.n = n;
            ds.examples.push_back(std::move(ex));
        }
        return ds;
    }
}
