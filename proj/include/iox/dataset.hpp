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

#include "iox/channel_sim.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace iox::dataset
{
    using channel::FeatureVector;
    using channel::Scene;
    using channel::SceneSpec;

    enum class SplitTag
    {
        train,
        test,
    };

    struct LabeledExample
    {
        FeatureVector features;
        int label = 0;
        SceneSpec scene; // provenance

        bool operator==(const LabeledExample &) const = default;
    };

    struct AttributeDataset
    {
        std::string attribute_id;
        std::vector<LabeledExample> examples;
        std::optional<SplitTag> split_tag; // unset for a freshly built dataset

        std::size_t size() const { return examples.size(); }
        std::size_t positives() const;
        double positive_rate() const;
        // Feature dimension; throws shape error when examples disagree.
        int feature_dim() const;

        bool operator==(const AttributeDataset &) const = default;
    };

    // Balanced binary dataset: ceil(target/2) positives and floor(target/2)
    // negatives, each drawn without replacement (negatives uniformly over all
    // non-matching scenes), then shuffled. Throws pool_exhausted naming the
    // deficient class.
    AttributeDataset build_attribute_dataset(const std::string &attribute_id, const std::vector<Scene> &pool,
                                             std::size_t target_size, std::uint64_t seed);

    struct SplitResult
    {
        AttributeDataset train;
        AttributeDataset test;
        std::vector<std::string> warnings; // e.g. a split missing one class
    };

    // Stratified split. The test size is round(N * test_fraction) clamped to
    // [1, N-1]; it is shared between classes by largest remainder.
    SplitResult split(const AttributeDataset &dataset, double test_fraction, std::uint64_t seed);

    // Newline-delimited records: one header line, then one example per line.
    void save_dataset(const AttributeDataset &dataset, const std::filesystem::path &path);

    AttributeDataset load_dataset(const std::filesystem::path &path);

    std::string dataset_file_name(const std::string &attribute_id);
}
